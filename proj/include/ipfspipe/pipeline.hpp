#pragma once

#include <cmath>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ipfspipe/cas.hpp"
#include "ipfspipe/errors.hpp"
#include "ipfspipe/ipfs_http.hpp"
#include "ipfspipe/ledger.hpp"
#include "ipfspipe/lightchain.hpp"
#include "ipfspipe/measure.hpp"
#include "ipfspipe/metrics.hpp"
#include "ipfspipe/watcher.hpp"

namespace ipfspipe::pipeline {

inline constexpr std::uint64_t kMiB = 1024 * 1024;

// ---------------------------------------------------------------------------
// Dummy-file generator
// ---------------------------------------------------------------------------

struct GeneratorConfig {
    std::uint64_t start_mb = 5;
    std::uint64_t gap_mb = 5;
    std::uint64_t max_mb = 550;
    std::filesystem::path out_dir;
    enum class Fill { zeros, random };
    Fill fill = Fill::zeros;     // zeros match the original recipe
    std::uint64_t seed = 0;      // random fill is reproducible per seed
};

// The size recurrence: size += gap, gap += 5, while size <= max.
inline std::vector<std::uint64_t> generator_sizes(std::uint64_t start_mb, std::uint64_t gap_mb,
                                                  std::uint64_t max_mb) {
    std::vector<std::uint64_t> sizes;
    std::uint64_t size = start_mb, gap = gap_mb;
    while (size <= max_mb) {
        sizes.push_back(size);
        size += gap;
        gap += 5;
    }
    return sizes;
}

struct GeneratedFile {
    std::filesystem::path path;
    std::uint64_t size_mb = 0;
};

inline void fill_random(const std::filesystem::path& path, std::uint64_t bytes,
                        std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorKind::io_error, "cannot create " + path.string());
    std::mt19937_64 rng(seed);
    std::vector<std::uint64_t> buf(cas::kStreamChunkBytes / sizeof(std::uint64_t));
    std::uint64_t remaining = bytes;
    while (remaining > 0) {
        for (auto& w : buf) w = rng();
        auto chunk = std::min<std::uint64_t>(remaining, cas::kStreamChunkBytes);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(chunk));
        if (!out)
            throw Error(errno == ENOSPC ? ErrorKind::storage_full : ErrorKind::io_error,
                        "write failed for " + path.string());
        remaining -= chunk;
    }
}

// Emits `dummy file <size>MB.dat` files following the recurrence. MB means
// MiB throughout. Zero fill uses sparse files, so the full ladder is cheap.
inline std::vector<GeneratedFile> gen_files(const GeneratorConfig& cfg) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec)
        throw Error(ErrorKind::io_error,
                    "cannot create " + cfg.out_dir.string() + ": " + ec.message());

    std::vector<GeneratedFile> out;
    for (std::uint64_t size_mb : generator_sizes(cfg.start_mb, cfg.gap_mb, cfg.max_mb)) {
        fs::path path = cfg.out_dir / ("dummy file " + std::to_string(size_mb) + "MB.dat");
        std::uint64_t bytes = size_mb * kMiB;
        if (cfg.fill == GeneratorConfig::Fill::random) {
            fill_random(path, bytes, cfg.seed ^ size_mb);
        } else {
            std::ofstream touch(path, std::ios::binary | std::ios::trunc);
            if (!touch)
                throw Error(ErrorKind::io_error, "cannot create " + path.string());
            touch.close();
            fs::resize_file(path, bytes, ec);
            if (ec)
                throw Error(ec == std::errc::no_space_on_device ? ErrorKind::storage_full
                                                                : ErrorKind::io_error,
                            "cannot size " + path.string() + ": " + ec.message());
        }
        out.push_back({path, size_mb});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline configuration
// ---------------------------------------------------------------------------

struct RegisterOn {
    bool ledger = true;
    bool lightchain = true;
    bool any() const { return ledger || lightchain; }
};

struct PipelineConfig {
    watcher::WatchConfig watch;
    cas::BackendKind backend = cas::BackendKind::local;
    RegisterOn register_on;
    ledger::GasSchedule gas_schedule;
    double tdp_watts = 15.0;
    std::filesystem::path report_dir;
    std::string user_address = "0x0000000000000000000000000000000000000001";
    std::filesystem::path store_dir;
    cas::RemoteConfig remote;
    std::filesystem::path ledger_journal;
    std::filesystem::path chain_journal;
    metrics::ResourceProbe* probe = nullptr; // null selects the /proc sampler

    void validate() const {
        if (!register_on.any())
            throw Error(ErrorKind::invalid_argument, "register_on must not be empty");
        if (tdp_watts <= 0.0)
            throw Error(ErrorKind::invalid_argument, "tdp_watts must be positive");
        watch.validate();
    }
};

inline std::unique_ptr<cas::Store> open_store(const PipelineConfig& cfg) {
    if (cfg.backend == cas::BackendKind::local)
        return std::make_unique<cas::LocalStore>(cfg.store_dir);
    auto remote = std::make_unique<cas::RemoteStore>(cfg.remote);
    if (!remote->daemon_reachable())
        throw Error(ErrorKind::backend_unreachable,
                    "IPFS daemon not reachable at " + cfg.remote.host + ":" +
                        std::to_string(cfg.remote.api_port));
    return remote;
}

inline std::unique_ptr<ledger::Ledger> open_or_deploy_ledger(
    const std::filesystem::path& journal, const ledger::GasSchedule& schedule) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::exists(journal) && fs::file_size(journal, ec) > 0) return ledger::Ledger::load(journal);
    return ledger::Ledger::deploy(journal, schedule).ledger;
}

inline std::unique_ptr<lightchain::Chain> open_or_create_chain(
    const std::filesystem::path& journal) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::exists(journal) && fs::file_size(journal, ec) > 0)
        return lightchain::Chain::load(journal);
    return lightchain::Chain::create(journal);
}

// ---------------------------------------------------------------------------
// Per-file processing
// ---------------------------------------------------------------------------

struct FileOutcome {
    std::filesystem::path path;
    std::string cid;
    metrics::UploadMetrics metrics;
    std::optional<metrics::EnergySample> energy;
    std::optional<ledger::TxReceipt> receipt;
    std::uint64_t store_time_ms = 0;
    std::optional<std::uint64_t> chain_index;
    double total_s = 0.0;
    std::string error; // empty on success

    bool ok() const { return error.empty(); }
};

struct ProcessOptions {
    RegisterOn register_on;
    std::string user_address;
    double tdp_watts = 15.0;
    metrics::ResourceProbe* probe = nullptr;
};

// upload -> pin -> register. Ledger first when both targets are on; a chain
// failure after a ledger commit is reported, never rolled back.
inline FileOutcome process_file(const std::filesystem::path& path, cas::Store& store,
                                ledger::Ledger* led, lightchain::Chain* chain,
                                const ProcessOptions& opts) {
    FileOutcome outcome;
    outcome.path = path;
    metrics::Stopwatch total;
    try {
        auto measured = metrics::measure_upload(path, store, opts.probe, opts.tdp_watts);
        outcome.cid = measured.cid.text;
        outcome.metrics = measured.metrics;
        outcome.energy = measured.energy;
        store.pin(measured.cid);

        if (opts.register_on.ledger && led) {
            auto [receipt, record] = led->store_data(opts.user_address, measured.cid.text);
            outcome.receipt = receipt;
            outcome.store_time_ms = record.store_time_ms;
        }
        if (opts.register_on.lightchain && chain) {
            try {
                auto block = chain->save_to_chain(measured.cid, store);
                outcome.chain_index = block.index;
            } catch (const Error& e) {
                if (outcome.receipt)
                    outcome.error = std::string("chain append failed after ledger commit: ") +
                                    e.what();
                else
                    throw;
            }
        }
    } catch (const Error& e) {
        outcome.error = e.what();
    } catch (const std::exception& e) {
        outcome.error = std::string("unexpected: ") + e.what();
    }
    outcome.total_s = total.elapsed_s();
    return outcome;
}

// ---------------------------------------------------------------------------
// run_pipeline
// ---------------------------------------------------------------------------

struct RunReport {
    std::vector<FileOutcome> files;
    std::uint64_t scans = 0;
    std::uint64_t events = 0;
    std::uint64_t failures = 0;
    std::vector<std::filesystem::path> report_paths;
};

namespace detail {

inline nlohmann::json config_echo(const PipelineConfig& cfg) {
    nlohmann::json targets = nlohmann::json::array();
    if (cfg.register_on.ledger) targets.push_back("ledger");
    if (cfg.register_on.lightchain) targets.push_back("lightchain");
    nlohmann::json j{
        {"type", "config"},
        {"root_dir", cfg.watch.root_dir.string()},
        {"scan_interval_s", cfg.watch.scan_interval_s},
        {"ignore_hidden", cfg.watch.ignore_hidden},
        {"backend", cfg.backend == cas::BackendKind::local ? "local" : "remote"},
        {"register_on", targets},
        {"tdp_watts", cfg.tdp_watts},
        {"user_address", cfg.user_address},
        {"store_dir", cfg.store_dir.string()},
        {"ledger_journal", cfg.ledger_journal.string()},
        {"chain_journal", cfg.chain_journal.string()},
        {"report_dir", cfg.report_dir.string()},
    };
    if (cfg.watch.stop_after_s) j["stop_after_s"] = *cfg.watch.stop_after_s;
    if (cfg.backend == cas::BackendKind::remote) {
        j["daemon"] = cfg.remote.host + ":" + std::to_string(cfg.remote.api_port);
        j["gateway_reads"] = cfg.remote.gateway_reads;
    }
    return j;
}

inline nlohmann::json outcome_json(const FileOutcome& f) {
    nlohmann::json j{{"type", "file"},
                     {"path", f.path.string()},
                     {"cid", f.cid},
                     {"size_bytes", f.metrics.size_bytes},
                     {"upload_time_s", f.metrics.upload_time_s},
                     {"bandwidth_kb_s", f.metrics.bandwidth_kb_s},
                     {"memory_used_mb", f.metrics.memory_used_mb},
                     {"total_s", f.total_s},
                     {"ok", f.ok()}};
    if (f.energy) j["energy_j"] = f.energy->energy_j;
    if (f.receipt) {
        j["block"] = f.receipt->block_number;
        j["tx_hash"] = f.receipt->tx_hash;
        j["gas_used"] = f.receipt->gas_used;
        j["tx_cost_units"] = f.receipt->tx_cost_units;
        j["store_time_ms"] = f.store_time_ms;
    }
    if (f.chain_index) j["chain_index"] = *f.chain_index;
    if (!f.error.empty()) j["error"] = f.error;
    return j;
}

inline metrics::CsvRow table11_row(const std::string& op, double time_s, double memory_mb,
                                   double bandwidth, std::uint64_t size_bytes,
                                   const std::string& cid) {
    using metrics::format_double;
    return {op,
            format_double(time_s, 4),
            format_double(memory_mb, 2),
            format_double(bandwidth, 2),
            format_double(static_cast<double>(size_bytes) / kMiB, 2),
            cid};
}

inline void write_run_reports(const PipelineConfig& cfg, RunReport& report) {
    namespace fs = std::filesystem;
    if (cfg.report_dir.empty()) return;
    fs::create_directories(cfg.report_dir);

    auto ndjson_path = cfg.report_dir / "run_report.ndjson";
    {
        std::ofstream out(ndjson_path, std::ios::binary | std::ios::trunc);
        out << config_echo(cfg).dump() << "\n";
        for (const auto& f : report.files) out << outcome_json(f).dump() << "\n";
        nlohmann::json summary{{"type", "summary"},
                               {"scans", report.scans},
                               {"events", report.events},
                               {"files", report.files.size()},
                               {"failures", report.failures}};
        out << summary.dump() << "\n";
    }
    report.report_paths.push_back(ndjson_path);

    std::vector<metrics::CsvRow> upload_rows;
    std::vector<metrics::CsvRow> energy_rows;
    using metrics::format_double;
    for (const auto& f : report.files) {
        if (!f.ok() && f.cid.empty()) continue;
        upload_rows.push_back(table11_row("Upload", f.metrics.upload_time_s,
                                          f.metrics.memory_used_mb, f.metrics.bandwidth_kb_s,
                                          f.metrics.size_bytes, f.cid));
        if (f.energy) {
            energy_rows.push_back({f.path.filename().string(),
                                   format_double(static_cast<double>(f.metrics.size_bytes) / kMiB, 2),
                                   format_double(f.energy->duration_s, 4),
                                   format_double(f.energy->initial_cpu_pct, 2),
                                   format_double(f.energy->final_cpu_pct, 2),
                                   format_double(f.energy->avg_cpu_pct, 2),
                                   format_double(f.energy->energy_j, 4),
                                   f.cid});
        }
    }
    auto uploads_csv = cfg.report_dir / "uploads.csv";
    metrics::write_report(upload_rows, metrics::ReportSchema::perf_table11, uploads_csv);
    report.report_paths.push_back(uploads_csv);

    auto energy_csv = cfg.report_dir / "energy.csv";
    metrics::write_report(energy_rows, metrics::ReportSchema::energy_csv, energy_csv);
    report.report_paths.push_back(energy_csv);
}

} // namespace detail

// Watches root_dir and pushes every stable new file through
// upload -> pin -> register until the watch window closes. Per-file
// failures are recorded in the report and never halt the run.
inline RunReport run_pipeline(const PipelineConfig& cfg, std::stop_token stop = {}) {
    cfg.validate();

    auto store = open_store(cfg); // fatal here if the backend is unreachable
    std::unique_ptr<ledger::Ledger> led;
    std::unique_ptr<lightchain::Chain> chain;
    if (cfg.register_on.ledger)
        led = open_or_deploy_ledger(cfg.ledger_journal, cfg.gas_schedule);
    if (cfg.register_on.lightchain) chain = open_or_create_chain(cfg.chain_journal);

    metrics::SystemProbe system_probe;
    ProcessOptions opts;
    opts.register_on = cfg.register_on;
    opts.user_address = cfg.user_address;
    opts.tdp_watts = cfg.tdp_watts;
    opts.probe = cfg.probe ? cfg.probe : &system_probe;

    std::deque<watcher::FileEvent> queue;
    std::mutex queue_mu;
    std::condition_variable queue_cv;
    bool done = false;

    RunReport report;
    std::mutex report_mu;

    std::thread worker([&] {
        for (;;) {
            watcher::FileEvent ev;
            {
                std::unique_lock lock(queue_mu);
                queue_cv.wait(lock, [&] { return done || !queue.empty(); });
                if (queue.empty()) {
                    if (done) return;
                    continue;
                }
                ev = std::move(queue.front());
                queue.pop_front();
            }
            auto outcome = process_file(ev.path, *store, led.get(), chain.get(), opts);
            std::lock_guard lock(report_mu);
            if (!outcome.ok()) ++report.failures;
            report.files.push_back(std::move(outcome));
        }
    });

    watcher::WatchSummary summary;
    try {
        summary = watcher::watch(
            cfg.watch,
            [&](const watcher::FileEvent& ev) {
                std::lock_guard lock(queue_mu);
                queue.push_back(ev);
                queue_cv.notify_one();
            },
            stop);
    } catch (...) {
        {
            std::lock_guard lock(queue_mu);
            done = true;
        }
        queue_cv.notify_all();
        worker.join();
        throw;
    }

    {
        std::lock_guard lock(queue_mu);
        done = true;
    }
    queue_cv.notify_all();
    worker.join();

    report.scans = summary.scans;
    report.events = summary.events;
    detail::write_run_reports(cfg, report);
    return report;
}

// ---------------------------------------------------------------------------
// Retrieval by ledger index
// ---------------------------------------------------------------------------

enum class RetrieveVerdict { verified, tampered, unavailable, unchecked };

inline const char* to_string(RetrieveVerdict v) {
    switch (v) {
        case RetrieveVerdict::verified: return "Verified";
        case RetrieveVerdict::tampered: return "Tampered";
        case RetrieveVerdict::unavailable: return "Unavailable";
        case RetrieveVerdict::unchecked: return "Unchecked";
    }
    return "?";
}

struct RetrieveResult {
    std::string cid;
    std::string bytes;
    RetrieveVerdict verdict = RetrieveVerdict::unchecked;
    double lookup_s = 0.0; // ledger lookup
    double fetch_s = 0.0;  // content fetch
    std::int64_t age_ms = 0;
};

// Ledger lookup, then content fetch, then integrity verdict against the
// lightchain's recorded content hash when one exists for this CID.
inline RetrieveResult retrieve_by_index(cas::Store& store, ledger::Ledger& led,
                                        const lightchain::Chain* chain, const std::string& user,
                                        std::size_t index) {
    RetrieveResult result;

    metrics::Stopwatch lookup;
    auto retrieved = led.retrieve_data(user, index);
    result.lookup_s = lookup.elapsed_s();
    result.cid = retrieved.cid;
    result.age_ms = retrieved.age_ms;

    std::string expected_hash;
    if (chain) {
        auto blocks = chain->blocks();
        for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
            if (it->cid == result.cid) {
                expected_hash = it->data_hash;
                break;
            }
        }
    }

    try {
        result.bytes = store.get(cas::Cid{result.cid, store.kind()}, &result.fetch_s);
        if (expected_hash.empty())
            result.verdict = RetrieveVerdict::unchecked;
        else
            result.verdict = (sha256_hex(result.bytes) == expected_hash)
                                 ? RetrieveVerdict::verified
                                 : RetrieveVerdict::tampered;
    } catch (const Error& e) {
        result.verdict = (e.kind() == ErrorKind::integrity_mismatch)
                             ? RetrieveVerdict::tampered
                             : RetrieveVerdict::unavailable;
    }
    return result;
}

inline RetrieveResult retrieve_by_index(const PipelineConfig& cfg, const std::string& user,
                                        std::size_t index) {
    auto store = open_store(cfg);
    auto led = ledger::Ledger::load(cfg.ledger_journal);
    std::unique_ptr<lightchain::Chain> chain;
    std::error_code ec;
    if (std::filesystem::exists(cfg.chain_journal, ec) &&
        std::filesystem::file_size(cfg.chain_journal, ec) > 0)
        chain = lightchain::Chain::load(cfg.chain_journal);
    return retrieve_by_index(*store, *led, chain.get(), user, index);
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchOptions {
    GeneratorConfig::Fill fill = GeneratorConfig::Fill::zeros;
    std::uint64_t seed = 1;
    double tdp_watts = 15.0;
    ledger::GasSchedule gas_schedule;
    std::string user_address = "0x0000000000000000000000000000000000000001";
    metrics::ResourceProbe* probe = nullptr;
    cas::RemoteConfig remote;
};

struct BenchRow {
    std::uint64_t size_mb = 0;
    FileOutcome outcome;
    RetrieveResult retrieval;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    std::vector<std::filesystem::path> csv_paths;
};

namespace detail {

inline void assert_bandwidth_identity(const metrics::UploadMetrics& m, const std::string& what) {
    if (m.upload_time_s <= 0.0) return;
    double size_kb = static_cast<double>(m.size_bytes) / 1024.0;
    double recon = m.bandwidth_kb_s * m.upload_time_s;
    double err = size_kb == 0.0 ? std::abs(recon) : std::abs(recon - size_kb) / size_kb;
    if (err > 1e-6)
        throw Error(ErrorKind::invalid_argument,
                    "bandwidth identity violated for " + what + ": rel err " +
                        std::to_string(err));
}

} // namespace detail

// Uploads one generated file per size through the full register+retrieve
// cycle and emits the four CSV reports. Internal metric identities are
// asserted before anything is written.
inline BenchResult bench(const std::vector<std::uint64_t>& sizes_mb, cas::BackendKind backend,
                         const std::filesystem::path& out_dir, BenchOptions options = {}) {
    namespace fs = std::filesystem;
    for (auto s : sizes_mb)
        if (s == 0) throw Error(ErrorKind::invalid_argument, "bench sizes must be positive");
    fs::create_directories(out_dir);

    PipelineConfig cfg;
    cfg.backend = backend;
    cfg.store_dir = out_dir / "cas";
    cfg.remote = options.remote;
    auto store = open_store(cfg);
    auto deployed = open_or_deploy_ledger(out_dir / "ledger.ndjson", options.gas_schedule);
    auto chain = open_or_create_chain(out_dir / "chain.ndjson");

    metrics::SystemProbe system_probe;
    ProcessOptions opts;
    opts.register_on = RegisterOn{true, true};
    opts.user_address = options.user_address;
    opts.tdp_watts = options.tdp_watts;
    opts.probe = options.probe ? options.probe : &system_probe;

    fs::path files_dir = out_dir / "files";
    fs::create_directories(files_dir);

    BenchResult result;
    for (std::size_t i = 0; i < sizes_mb.size(); ++i) {
        std::uint64_t size_mb = sizes_mb[i];
        fs::path path = files_dir / ("dummy file " + std::to_string(size_mb) + "MB.dat");
        if (options.fill == GeneratorConfig::Fill::random) {
            fill_random(path, size_mb * kMiB, options.seed ^ (i + 1));
        } else {
            std::ofstream touch(path, std::ios::binary | std::ios::trunc);
            touch.close();
            std::error_code ec;
            fs::resize_file(path, size_mb * kMiB, ec);
            if (ec) throw Error(ErrorKind::io_error, "cannot size " + path.string());
        }

        BenchRow row;
        row.size_mb = size_mb;
        row.outcome = process_file(path, *store, deployed.get(), chain.get(), opts);
        if (!row.outcome.ok()) {
            result.rows.push_back(std::move(row));
            continue;
        }
        // The record just stored is the user's latest.
        row.retrieval = retrieve_by_index(*store, *deployed, chain.get(), options.user_address,
                                          deployed->get_data_count(options.user_address) - 1);
        row.outcome.metrics.retrieval_time_s = row.retrieval.fetch_s;
        result.rows.push_back(std::move(row));
    }

    using metrics::CsvRow;
    using metrics::format_double;
    std::vector<CsvRow> table7, table11, table8, energy;
    for (const auto& row : result.rows) {
        if (!row.outcome.ok()) continue;
        detail::assert_bandwidth_identity(row.outcome.metrics, row.outcome.path.string());

        const auto& m = row.outcome.metrics;
        table7.push_back({format_double(static_cast<double>(row.size_mb), 1),
                          format_double(m.upload_time_s, 4),
                          format_double(row.outcome.energy ? row.outcome.energy->energy_j : 0.0, 4),
                          format_double(m.memory_used_mb, 2)});

        table11.push_back(detail::table11_row("Upload", m.upload_time_s, m.memory_used_mb,
                                              m.bandwidth_kb_s, m.size_bytes, row.outcome.cid));
        double fetch_s = row.retrieval.fetch_s;
        double retr_bw = fetch_s > 0.0 ? metrics::bandwidth_kb_s(m.size_bytes, fetch_s) : 0.0;
        table11.push_back(detail::table11_row("Retrieval", fetch_s, 0.0, retr_bw, m.size_bytes,
                                              row.outcome.cid));

        if (row.outcome.receipt) {
            const auto& r = *row.outcome.receipt;
            double retrieval_ms = (row.retrieval.lookup_s + row.retrieval.fetch_s) * 1000.0;
            table8.push_back({std::to_string(r.block_number), r.tx_hash,
                              std::to_string(r.gas_used), std::to_string(r.tx_cost_units),
                              format_double(retrieval_ms, 2), row.outcome.cid});
        }
        if (row.outcome.energy) {
            const auto& e = *row.outcome.energy;
            energy.push_back({row.outcome.path.filename().string(),
                              format_double(static_cast<double>(row.size_mb), 2),
                              format_double(e.duration_s, 4), format_double(e.initial_cpu_pct, 2),
                              format_double(e.final_cpu_pct, 2), format_double(e.avg_cpu_pct, 2),
                              format_double(e.energy_j, 4), row.outcome.cid});
        }
    }

    std::vector<CsvRow> table12;
    for (const auto& audit : lightchain::audit_chain(*chain, *store)) {
        table12.push_back({std::to_string(audit.block), audit.cid,
                           format_double(audit.fetch_time_s, 4), std::to_string(audit.size_bytes),
                           audit.stored_hash, audit.fetched_hash});
    }

    auto emit = [&](const std::vector<CsvRow>& rows, metrics::ReportSchema schema,
                    const std::string& name) {
        auto path = out_dir / name;
        metrics::write_report(rows, schema, path);
        result.csv_paths.push_back(path);
    };
    emit(table7, metrics::ReportSchema::upload_table7, "table7_uploads.csv");
    emit(table11, metrics::ReportSchema::perf_table11, "table11_perf.csv");
    emit(table12, metrics::ReportSchema::chain_table12, "table12_chain.csv");
    emit(table8, metrics::ReportSchema::ledger_table8, "table8_ledger.csv");
    emit(energy, metrics::ReportSchema::energy_csv, "energy.csv");
    return result;
}

} // namespace ipfspipe::pipeline
