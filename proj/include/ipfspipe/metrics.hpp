#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef __linux__
#include <unistd.h>
#endif

#include "ipfspipe/errors.hpp"

namespace ipfspipe::metrics {

inline std::int64_t now_utc_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

// Wall-clock stopwatch on the monotonic clock; immune to NTP adjustments.
class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_s() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

struct UploadMetrics {
    std::uint64_t size_bytes = 0;
    double upload_time_s = 0.0;
    std::optional<double> retrieval_time_s;
    double memory_used_mb = 0.0; // final RSS minus initial RSS
    double bandwidth_kb_s = 0.0;
    bool empty_content = false;
};

struct EnergySample {
    double initial_cpu_pct = 0.0;
    double final_cpu_pct = 0.0;
    double avg_cpu_pct = 0.0;
    double duration_s = 0.0;
    double tdp_watts = 0.0;
    double energy_j = 0.0;
};

// cpu% at the TDP envelope: full utilization draws exactly tdp_watts.
inline double calculate_power(double cpu_pct, double tdp_watts) {
    if (cpu_pct < 0.0 || cpu_pct > 100.0)
        throw Error(ErrorKind::invalid_argument,
                    "cpu_pct out of [0,100]: " + std::to_string(cpu_pct));
    if (tdp_watts <= 0.0)
        throw Error(ErrorKind::invalid_argument, "tdp_watts must be positive");
    return (cpu_pct / 100.0) * tdp_watts;
}

inline EnergySample energy_sample(double initial_cpu_pct, double final_cpu_pct,
                                  double duration_s, double tdp_watts) {
    if (duration_s < 0.0)
        throw Error(ErrorKind::invalid_argument, "duration_s must be non-negative");
    EnergySample s;
    s.initial_cpu_pct = initial_cpu_pct;
    s.final_cpu_pct = final_cpu_pct;
    s.avg_cpu_pct = (initial_cpu_pct + final_cpu_pct) / 2.0;
    s.duration_s = duration_s;
    s.tdp_watts = tdp_watts;
    s.energy_j = calculate_power(s.avg_cpu_pct, tdp_watts) * duration_s;
    return s;
}

inline double bandwidth_kb_s(std::uint64_t size_bytes, double elapsed_s) {
    if (elapsed_s <= 0.0)
        throw Error(ErrorKind::invalid_argument,
                    "elapsed_s must be positive: " + std::to_string(elapsed_s));
    return (static_cast<double>(size_bytes) / 1024.0) / elapsed_s;
}

// Injectable resource readings. Production uses the /proc sampler below;
// tests substitute a deterministic fake.
class ResourceProbe {
public:
    virtual ~ResourceProbe() = default;
    virtual double cpu_pct() = 0; // 0..100, whole-machine utilization
    virtual double rss_mb() = 0;  // resident set of this process
};

// /proc-based sampler. cpu_pct() mirrors the usual "instantaneous" reading:
// utilization since the previous call, 0 on the first.
class SystemProbe final : public ResourceProbe {
public:
    double cpu_pct() override {
#ifdef __linux__
        std::ifstream in("/proc/stat");
        std::string cpu;
        std::uint64_t user = 0, nice = 0, system = 0, idle = 0, iowait = 0, irq = 0,
                      softirq = 0, steal = 0;
        in >> cpu >> user >> nice >> system >> idle >> iowait >> irq >> softirq >> steal;
        if (!in || cpu != "cpu") throw Error(ErrorKind::io_error, "cannot sample /proc/stat");

        std::uint64_t idle_all = idle + iowait;
        std::uint64_t total = user + nice + system + idle_all + irq + softirq + steal;
        double pct = 0.0;
        if (has_prev_ && total > prev_total_) {
            auto d_total = static_cast<double>(total - prev_total_);
            auto d_idle = static_cast<double>(idle_all - prev_idle_);
            pct = 100.0 * (d_total - d_idle) / d_total;
        }
        prev_total_ = total;
        prev_idle_ = idle_all;
        has_prev_ = true;
        return std::clamp(pct, 0.0, 100.0);
#else
        return 0.0;
#endif
    }

    double rss_mb() override {
#ifdef __linux__
        std::ifstream in("/proc/self/statm");
        std::uint64_t size_pages = 0, rss_pages = 0;
        in >> size_pages >> rss_pages;
        if (!in) throw Error(ErrorKind::io_error, "cannot sample /proc/self/statm");
        return static_cast<double>(rss_pages) * page_size_ / (1024.0 * 1024.0);
#else
        return 0.0;
#endif
    }

private:
    bool has_prev_ = false;
    std::uint64_t prev_total_ = 0;
    std::uint64_t prev_idle_ = 0;
#ifdef __linux__
    double page_size_ = static_cast<double>(::sysconf(_SC_PAGESIZE));
#else
    double page_size_ = 4096.0;
#endif
};

// ---------------------------------------------------------------------------
// CSV reports
// ---------------------------------------------------------------------------

enum class ReportSchema {
    upload_table7,
    perf_table11,
    chain_table12,
    energy_csv,
    ledger_table8,
};

inline const std::vector<std::string>& schema_header(ReportSchema schema) {
    static const std::vector<std::string> table7 = {"File Size (MB)", "Uploading Time (s)",
                                                    "Power Consumption (J)", "Memory (MB)"};
    static const std::vector<std::string> table11 = {"Operation", "Time (s)",  "Memory (MB)",
                                                     "Bandwidth (KB/s)", "Size (MB)", "CID"};
    static const std::vector<std::string> table12 = {"Block", "CID",         "Time (s)",
                                                     "Size (B)", "Stored Hash", "Fetched Hash"};
    static const std::vector<std::string> energy = {
        "File",          "Size (MB)",     "Duration (s)", "Initial CPU (%)",
        "Final CPU (%)", "Avg CPU (%)",   "Energy (J)",   "CID"};
    static const std::vector<std::string> table8 = {
        "Block Number",          "Transaction Hash",    "Gas Cost Units",
        "Transaction Cost Units", "Retrieval Time (ms)", "IPFS Hash"};
    switch (schema) {
        case ReportSchema::upload_table7: return table7;
        case ReportSchema::perf_table11: return table11;
        case ReportSchema::chain_table12: return table12;
        case ReportSchema::energy_csv: return energy;
        case ReportSchema::ledger_table8: return table8;
    }
    throw Error(ErrorKind::invalid_argument, "unknown report schema");
}

using CsvRow = std::vector<std::string>;

inline std::string csv_escape(const std::string& field) {
    bool needs_quote = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quote) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

// RFC-4180 quoting, UTF-8, "\n" line endings. Returns the data row count.
inline std::size_t write_report(const std::vector<CsvRow>& rows, ReportSchema schema,
                                const std::filesystem::path& out_path) {
    const auto& header = schema_header(schema);
    for (const auto& row : rows)
        if (row.size() != header.size())
            throw Error(ErrorKind::invalid_argument,
                        "row arity " + std::to_string(row.size()) + " does not match schema");

    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorKind::io_error, "cannot write report " + out_path.string());

    auto write_row = [&out](const CsvRow& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << csv_escape(row[i]);
        }
        out << '\n';
    };
    write_row(header);
    for (const auto& row : rows) write_row(row);
    out.flush();
    if (!out)
        throw Error(ErrorKind::io_error, "short write on report " + out_path.string());
    return rows.size();
}

// Parses a CSV produced by write_report (quotes, escaped quotes, embedded
// newlines). Returns all rows including the header.
inline std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io_error, "cannot read csv " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<CsvRow> rows;
    CsvRow row;
    std::string field;
    bool in_quotes = false;
    for (std::size_t i = 0; i < content.size(); ++i) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (!field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string format_double(double v, int decimals = 2) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(decimals);
    os << v;
    return os.str();
}

} // namespace ipfspipe::metrics
