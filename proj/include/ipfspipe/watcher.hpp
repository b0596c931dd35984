#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "ipfspipe/errors.hpp"
#include "ipfspipe/metrics.hpp"

namespace ipfspipe::watcher {

struct WatchConfig {
    std::filesystem::path root_dir;
    double scan_interval_s = 5.0;
    // nullopt means watch until an external stop signal arrives.
    std::optional<double> stop_after_s = 1200.0;
    bool ignore_hidden = true;

    void validate() const {
        if (scan_interval_s <= 0.0)
            throw Error(ErrorKind::invalid_argument, "scan_interval_s must be positive");
        if (stop_after_s) {
            if (*stop_after_s <= 0.0)
                throw Error(ErrorKind::invalid_argument, "stop_after_s must be positive");
            if (scan_interval_s >= *stop_after_s)
                throw Error(ErrorKind::invalid_argument,
                            "scan_interval_s must be smaller than stop_after_s");
        }
    }
};

struct FileEvent {
    std::filesystem::path path;
    std::uint64_t size_bytes = 0;
    std::int64_t detected_at_ms = 0;
    std::string dedup_key;
};

using DedupSet = std::unordered_set<std::string>;

// Identity under which a file counts as already uploaded. Pure function of
// (canonical path, size, mtime): editing a file re-emits it, re-copying the
// identical file does not.
inline std::string dedup_key_for(const std::filesystem::path& canonical_path,
                                 std::uint64_t size_bytes,
                                 std::filesystem::file_time_type mtime) {
    return canonical_path.string() + "|" + std::to_string(size_bytes) + "|" +
           std::to_string(mtime.time_since_epoch().count());
}

namespace detail {
inline bool is_hidden_name(const std::filesystem::path& p) {
    auto name = p.filename().string();
    return !name.empty() && name.front() == '.';
}
} // namespace detail

// One pass over root_dir. Emits events for readable regular files whose
// dedup key is new, inserting those keys into `seen`. Files that change
// size between two stat probes 100 ms apart are mid-copy and are left for
// a later scan. Unreadable entries are skipped, never fatal.
inline std::vector<FileEvent> scan_once(const WatchConfig& config, DedupSet& seen) {
    namespace fs = std::filesystem;
    config.validate();

    std::error_code ec;
    if (!fs::is_directory(config.root_dir, ec) || ec)
        throw Error(ErrorKind::root_missing,
                    "watch root is gone: " + config.root_dir.string());

    struct Candidate {
        fs::path path;
        std::uint64_t size;
        fs::file_time_type mtime;
    };
    std::vector<Candidate> candidates;

    try {
        for (const auto& entry : fs::directory_iterator(config.root_dir, ec)) {
            std::error_code fec;
            if (!entry.is_regular_file(fec) || fec) continue;
            if (config.ignore_hidden && detail::is_hidden_name(entry.path())) continue;

            auto size = entry.file_size(fec);
            if (fec) continue;
            auto mtime = fs::last_write_time(entry.path(), fec);
            if (fec) continue;

            auto canonical = fs::weakly_canonical(entry.path(), fec);
            if (fec) canonical = entry.path();
            if (seen.contains(dedup_key_for(canonical, size, mtime))) continue;
            candidates.push_back({canonical, size, mtime});
        }
    } catch (const fs::filesystem_error& e) {
        throw Error(ErrorKind::root_missing,
                    "cannot list " + config.root_dir.string() + ": " + e.what());
    }
    if (ec)
        throw Error(ErrorKind::root_missing,
                    "cannot list " + config.root_dir.string() + ": " + ec.message());

    std::vector<FileEvent> events;
    if (candidates.empty()) return events;

    // Stability probe: re-stat after 100 ms and drop anything still growing.
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    for (const auto& c : candidates) {
        std::error_code fec;
        auto size_now = fs::file_size(c.path, fec);
        if (fec) continue; // vanished mid-scan
        auto mtime_now = fs::last_write_time(c.path, fec);
        if (fec) continue;
        if (size_now != c.size || mtime_now != c.mtime) continue; // still being written

        FileEvent ev;
        ev.path = c.path;
        ev.size_bytes = size_now;
        ev.detected_at_ms = metrics::now_utc_ms();
        ev.dedup_key = dedup_key_for(c.path, size_now, mtime_now);
        seen.insert(ev.dedup_key);
        events.push_back(std::move(ev));
    }
    return events;
}

struct WatchSummary {
    std::uint64_t scans = 0;
    std::uint64_t events = 0;
};

using EventSink = std::function<void(const FileEvent&)>;

// Polls root_dir every scan_interval_s until stop_after_s elapses or the
// stop token fires. The sink is invoked once per event; the watcher does
// not wait for downstream processing.
inline WatchSummary watch(const WatchConfig& config, const EventSink& sink,
                          std::stop_token stop = {}) {
    config.validate();
    WatchSummary summary;
    DedupSet seen;

    auto started = std::chrono::steady_clock::now();
    auto elapsed_s = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    };

    double next_scan_s = 0.0;
    while (!stop.stop_requested()) {
        auto events = scan_once(config, seen);
        ++summary.scans;
        for (const auto& ev : events) {
            ++summary.events;
            if (sink) sink(ev);
        }

        // fixed cadence, but skip slots a slow scan already consumed
        next_scan_s = std::max(next_scan_s + config.scan_interval_s, elapsed_s());
        while (!stop.stop_requested()) {
            double now_s = elapsed_s();
            if (config.stop_after_s && now_s >= *config.stop_after_s) return summary;
            if (now_s >= next_scan_s) break;
            double wait_s = std::min(next_scan_s - now_s, 0.02);
            if (config.stop_after_s) wait_s = std::min(wait_s, *config.stop_after_s - now_s);
            std::this_thread::sleep_for(std::chrono::duration<double>(std::max(wait_s, 0.001)));
        }
    }
    return summary;
}

// Human-readable size, largest unit with mantissa >= 1, two decimals.
inline std::string format_file_size(std::uint64_t bytes) {
    static const char* units[] = {"Bytes", "KB", "MB", "GB"};
    double value = static_cast<double>(bytes);
    int unit = 0;
    while (value >= 1024.0 && unit < 3) {
        value /= 1024.0;
        ++unit;
    }
    return metrics::format_double(value, 2) + " " + units[unit];
}

} // namespace ipfspipe::watcher
