#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "ipfspipe/cas.hpp"
#include "ipfspipe/errors.hpp"
#include "ipfspipe/metrics.hpp"

namespace ipfspipe::cas {

struct RemoteConfig {
    std::string host = "127.0.0.1";
    int api_port = 5001;
    int gateway_port = 8080;
    // When set, get() reads GET /ipfs/<cid> from the gateway instead of
    // the API's cat endpoint.
    bool gateway_reads = false;
    int timeout_s = 120;
};

// Client for an IPFS daemon's HTTP API: POST /api/v0/add (multipart),
// /api/v0/cat, /api/v0/pin/add, plus optional read-only gateway fetches.
// CID computation is entirely the daemon's; we never recompute it here.
class RemoteStore final : public Store {
public:
    explicit RemoteStore(RemoteConfig config = {}) : config_(std::move(config)) {}

    BackendKind kind() const override { return BackendKind::remote; }
    const RemoteConfig& config() const { return config_; }

    bool daemon_reachable() {
        auto client = api_client();
        auto res = client.Post("/api/v0/version");
        return res && res->status == 200;
    }

    PutResult put(std::string_view content) override {
        return add_bytes(std::string(content), "blob");
    }

    PutResult put_file(const std::filesystem::path& file) override {
        std::ifstream in(file, std::ios::binary);
        if (!in)
            throw Error(ErrorKind::io_error, "cannot read " + file.string());
        std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        return add_bytes(std::move(content), file.filename().string());
    }

    std::string get(const Cid& cid, double* elapsed_s = nullptr) override {
        metrics::Stopwatch timer;
        httplib::Result res = config_.gateway_reads
                                  ? gateway_client().Get("/ipfs/" + cid.text)
                                  : api_client().Post("/api/v0/cat?arg=" + cid.text);
        check_reachable(res, "cat");
        if (res->status == 404)
            throw Error(ErrorKind::not_found, "daemon has no content for " + cid.text);
        if (res->status != 200)
            throw Error(ErrorKind::not_found,
                        "cat " + cid.text + " failed: " + status_detail(*res));
        if (elapsed_s) *elapsed_s = timer.elapsed_s();
        return res->body;
    }

    ContentStat pin(const Cid& cid) override {
        auto client = api_client();
        auto res = client.Post("/api/v0/pin/add?arg=" + cid.text);
        check_reachable(res, "pin/add");
        if (res->status != 200)
            throw Error(ErrorKind::not_found,
                        "pin " + cid.text + " failed: " + status_detail(*res));
        ContentStat st = stat(cid);
        st.pinned = true;
        return st;
    }

    ContentStat stat(const Cid& cid) override {
        auto client = api_client();
        auto res = client.Post("/api/v0/files/stat?arg=/ipfs/" + cid.text);
        check_reachable(res, "files/stat");
        if (res->status != 200)
            throw Error(ErrorKind::not_found,
                        "stat " + cid.text + " failed: " + status_detail(*res));
        auto j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded())
            throw Error(ErrorKind::io_error, "unparseable files/stat response");

        ContentStat st;
        st.size_bytes = j.value("Size", std::uint64_t{0});
        st.pinned = is_pinned(cid);
        st.created_at_ms = 0; // the daemon does not expose creation time
        return st;
    }

private:
    httplib::Client api_client() {
        httplib::Client c(config_.host, config_.api_port);
        c.set_connection_timeout(5, 0);
        c.set_read_timeout(config_.timeout_s, 0);
        c.set_write_timeout(config_.timeout_s, 0);
        return c;
    }

    httplib::Client gateway_client() {
        httplib::Client c(config_.host, config_.gateway_port);
        c.set_connection_timeout(5, 0);
        c.set_read_timeout(config_.timeout_s, 0);
        return c;
    }

    static std::string status_detail(const httplib::Response& res) {
        auto j = nlohmann::json::parse(res.body, nullptr, false);
        if (!j.is_discarded() && j.contains("Message"))
            return j["Message"].get<std::string>();
        return "HTTP " + std::to_string(res.status);
    }

    void check_reachable(const httplib::Result& res, const std::string& what) {
        if (!res)
            throw Error(ErrorKind::backend_unreachable,
                        "daemon " + config_.host + ":" + std::to_string(config_.api_port) +
                            " unreachable during " + what + " (" +
                            httplib::to_string(res.error()) + ")");
    }

    PutResult add_bytes(std::string content, const std::string& name) {
        metrics::Stopwatch timer;
        std::uint64_t size = content.size();

        httplib::MultipartFormDataItems items = {
            {"file", std::move(content), name, "application/octet-stream"},
        };
        auto client = api_client();
        auto res = client.Post("/api/v0/add?pin=false", items);
        check_reachable(res, "add");
        if (res->status != 200)
            throw Error(ErrorKind::io_error, "add failed: " + status_detail(*res));

        // The add endpoint may stream several JSON objects; the last line
        // carries the root Hash.
        std::string hash;
        std::istringstream body(res->body);
        std::string line;
        while (std::getline(body, line)) {
            if (line.empty()) continue;
            auto j = nlohmann::json::parse(line, nullptr, false);
            if (!j.is_discarded() && j.contains("Hash"))
                hash = j["Hash"].get<std::string>();
        }
        if (hash.empty())
            throw Error(ErrorKind::io_error, "add response carried no Hash field");

        double elapsed = timer.elapsed_s();
        PutResult out;
        out.cid = Cid{hash, BackendKind::remote};
        out.metrics.size_bytes = size;
        out.metrics.upload_time_s = elapsed;
        out.metrics.empty_content = (size == 0);
        out.metrics.bandwidth_kb_s =
            elapsed > 0.0 ? metrics::bandwidth_kb_s(size, elapsed) : 0.0;
        return out;
    }

    bool is_pinned(const Cid& cid) {
        auto client = api_client();
        auto res = client.Post("/api/v0/pin/ls?arg=" + cid.text);
        return res && res->status == 200;
    }

    RemoteConfig config_;
};

} // namespace ipfspipe::cas
