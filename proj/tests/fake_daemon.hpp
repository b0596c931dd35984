#pragma once

#include <map>
#include <set>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "ipfspipe/cas.hpp"
#include "ipfspipe/ipfs_http.hpp"

// In-process stand-in for a kubo daemon: the API endpoints RemoteStore
// speaks plus the read-only gateway, sharing one object map.
class FakeDaemon {
public:
    FakeDaemon() {
        api_.Post("/api/v0/version", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"Version":"0.29.0-fake"})", "application/json");
        });

        api_.Post("/api/v0/add", [this](const httplib::Request& req, httplib::Response& res) {
            if (!req.has_file("file")) {
                res.status = 400;
                res.set_content(R"({"Message":"file argument required"})", "application/json");
                return;
            }
            const auto& file = req.get_file_value("file");
            std::string hash = ipfspipe::cas::local_cid_text(file.content);
            objects_[hash] = file.content;
            if (req.get_param_value("pin") != "false") pins_.insert(hash);
            nlohmann::json j{{"Name", file.filename},
                             {"Hash", hash},
                             {"Size", std::to_string(file.content.size())}};
            res.set_content(j.dump() + "\n", "application/json");
        });

        api_.Post("/api/v0/cat", [this](const httplib::Request& req, httplib::Response& res) {
            auto it = objects_.find(req.get_param_value("arg"));
            if (it == objects_.end()) {
                res.status = 500;
                res.set_content(R"({"Message":"merkledag: not found"})", "application/json");
                return;
            }
            res.set_content(it->second, "application/octet-stream");
        });

        api_.Post("/api/v0/pin/add", [this](const httplib::Request& req, httplib::Response& res) {
            auto cid = req.get_param_value("arg");
            if (!objects_.contains(cid)) {
                res.status = 500;
                res.set_content(R"({"Message":"merkledag: not found"})", "application/json");
                return;
            }
            pins_.insert(cid);
            nlohmann::json j{{"Pins", {cid}}};
            res.set_content(j.dump(), "application/json");
        });

        api_.Post("/api/v0/pin/ls", [this](const httplib::Request& req, httplib::Response& res) {
            auto cid = req.get_param_value("arg");
            if (!pins_.contains(cid)) {
                res.status = 500;
                res.set_content(R"({"Message":"path is not pinned"})", "application/json");
                return;
            }
            nlohmann::json j{{"Keys", {{cid, {{"Type", "recursive"}}}}}};
            res.set_content(j.dump(), "application/json");
        });

        api_.Post("/api/v0/files/stat",
                  [this](const httplib::Request& req, httplib::Response& res) {
                      auto arg = req.get_param_value("arg");
                      const std::string prefix = "/ipfs/";
                      std::string cid = arg.starts_with(prefix) ? arg.substr(prefix.size()) : arg;
                      auto it = objects_.find(cid);
                      if (it == objects_.end()) {
                          res.status = 500;
                          res.set_content(R"({"Message":"file does not exist"})",
                                          "application/json");
                          return;
                      }
                      nlohmann::json j{{"Hash", cid},
                                       {"Size", it->second.size()},
                                       {"CumulativeSize", it->second.size() + 11},
                                       {"Type", "file"}};
                      res.set_content(j.dump(), "application/json");
                  });

        gateway_.Get(R"(/ipfs/(.+))",
                     [this](const httplib::Request& req, httplib::Response& res) {
                         auto it = objects_.find(req.matches[1]);
                         if (it == objects_.end()) {
                             res.status = 404;
                             res.set_content("ipfs resolve: not found", "text/plain");
                             return;
                         }
                         res.set_content(it->second, "application/octet-stream");
                     });

        api_port_ = api_.bind_to_any_port("127.0.0.1");
        gateway_port_ = gateway_.bind_to_any_port("127.0.0.1");
        api_thread_ = std::thread([this] { api_.listen_after_bind(); });
        gateway_thread_ = std::thread([this] { gateway_.listen_after_bind(); });
        api_.wait_until_ready();
        gateway_.wait_until_ready();
    }

    ~FakeDaemon() {
        api_.stop();
        gateway_.stop();
        api_thread_.join();
        gateway_thread_.join();
    }

    ipfspipe::cas::RemoteConfig config(bool gateway_reads = false) const {
        ipfspipe::cas::RemoteConfig cfg;
        cfg.host = "127.0.0.1";
        cfg.api_port = api_port_;
        cfg.gateway_port = gateway_port_;
        cfg.gateway_reads = gateway_reads;
        return cfg;
    }

    bool pinned(const std::string& cid) const { return pins_.contains(cid); }
    std::size_t object_count() const { return objects_.size(); }
    void drop_object(const std::string& cid) { objects_.erase(cid); }
    void corrupt_object(const std::string& cid) {
        auto it = objects_.find(cid);
        if (it != objects_.end() && !it->second.empty()) it->second[0] ^= 0x01;
    }

private:
    httplib::Server api_, gateway_;
    std::map<std::string, std::string> objects_;
    std::set<std::string> pins_;
    int api_port_ = 0, gateway_port_ = 0;
    std::thread api_thread_, gateway_thread_;
};
