#pragma once

#include <filesystem>
#include <optional>

#include "ipfspipe/cas.hpp"
#include "ipfspipe/metrics.hpp"

namespace ipfspipe::metrics {

struct MeasuredUpload {
    cas::Cid cid;
    UploadMetrics metrics;
    std::optional<EnergySample> energy; // absent when the probe failed
};

// Times a put_file with CPU/RSS probes before and after, then applies the
// avg-cpu x TDP energy model. A failing probe never fails the upload; it
// just leaves the energy sample empty.
inline MeasuredUpload measure_upload(const std::filesystem::path& file, cas::Store& store,
                                     ResourceProbe* probe, double tdp_watts) {
    double initial_cpu = 0.0, initial_rss = 0.0;
    bool probe_ok = probe != nullptr;
    if (probe_ok) {
        try {
            initial_cpu = probe->cpu_pct();
            initial_rss = probe->rss_mb();
        } catch (...) {
            probe_ok = false;
        }
    }

    Stopwatch timer;
    cas::PutResult put = store.put_file(file);
    double duration_s = timer.elapsed_s();

    MeasuredUpload out;
    out.cid = put.cid;
    out.metrics = put.metrics;
    out.metrics.upload_time_s = duration_s;
    out.metrics.bandwidth_kb_s =
        duration_s > 0.0 ? bandwidth_kb_s(out.metrics.size_bytes, duration_s) : 0.0;

    if (probe_ok) {
        try {
            double final_cpu = probe->cpu_pct();
            double final_rss = probe->rss_mb();
            out.metrics.memory_used_mb = final_rss - initial_rss;
            out.energy = energy_sample(initial_cpu, final_cpu, duration_s, tdp_watts);
        } catch (...) {
            out.energy = std::nullopt;
        }
    }
    return out;
}

} // namespace ipfspipe::metrics
