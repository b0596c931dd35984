#pragma once

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <unordered_set>

#include <json.hpp>

#include "ipfspipe/base58.hpp"
#include "ipfspipe/errors.hpp"
#include "ipfspipe/hash.hpp"
#include "ipfspipe/journal.hpp"
#include "ipfspipe/metrics.hpp"

namespace ipfspipe::cas {

enum class BackendKind { local, remote };

// Content identifier. For the local backend this is the base58btc encoding
// of the sha2-256 multihash (0x12 0x20 + digest) of the raw content bytes.
// Remote CIDs come from the daemon verbatim and may use a different layout.
struct Cid {
    std::string text;
    BackendKind backend_kind = BackendKind::local;

    bool operator==(const Cid&) const = default;
};

struct ContentStat {
    std::uint64_t size_bytes = 0;
    bool pinned = false;
    std::int64_t created_at_ms = 0;
};

struct PutResult {
    Cid cid;
    metrics::UploadMetrics metrics;
};

inline constexpr std::size_t kStreamChunkBytes = 8 * 1024 * 1024;

inline std::string local_cid_from_digest(const Sha256Digest& digest) {
    std::uint8_t multihash[34];
    multihash[0] = 0x12; // sha2-256
    multihash[1] = 0x20; // 32-byte digest
    std::memcpy(multihash + 2, digest.data(), digest.size());
    return base58btc_encode(multihash, sizeof(multihash));
}

inline std::string local_cid_text(std::string_view content) {
    return local_cid_from_digest(sha256(content));
}

// Well-formed local CID: Qm + 44 base58 chars, decoding to a 0x12 0x20 multihash.
inline bool is_valid_local_cid(std::string_view text) {
    if (text.size() != 46 || text[0] != 'Q' || text[1] != 'm') return false;
    if (!is_base58btc(text)) return false;
    auto bytes = base58btc_decode(text);
    return bytes.size() == 34 && bytes[0] == 0x12 && bytes[1] == 0x20;
}

// Digest the CID commits to (local backend only).
inline Sha256Digest digest_from_local_cid(std::string_view text) {
    if (!is_valid_local_cid(text))
        throw Error(ErrorKind::invalid_argument, "malformed local CID: " + std::string(text));
    auto bytes = base58btc_decode(text);
    Sha256Digest d{};
    std::memcpy(d.data(), bytes.data() + 2, d.size());
    return d;
}

class Store {
public:
    virtual ~Store() = default;
    virtual BackendKind kind() const = 0;

    // Stores content and returns its CID plus timing/bandwidth metrics
    // measured around the store or network call.
    virtual PutResult put(std::string_view content) = 0;
    virtual PutResult put_file(const std::filesystem::path& file) = 0;

    // Returns the stored bytes. The local backend re-hashes and refuses to
    // return bytes that no longer match the CID. elapsed_s, when non-null,
    // receives the retrieval wall-clock duration.
    virtual std::string get(const Cid& cid, double* elapsed_s = nullptr) = 0;

    virtual ContentStat pin(const Cid& cid) = 0;
    virtual ContentStat stat(const Cid& cid) = 0;
};

// One file per object under root/objects/<2-char fanout>/<cid>, plus an
// append-only pin journal. Deliberately easy to inspect and corrupt in tests.
class LocalStore final : public Store {
public:
    explicit LocalStore(std::filesystem::path root) : root_(std::move(root)) {
        namespace fs = std::filesystem;
        fs::create_directories(root_ / "objects");
        pin_journal_path_ = root_ / "pins.journal";
        if (fs::exists(pin_journal_path_)) {
            for (const auto& line : read_journal_lines(pin_journal_path_)) {
                auto j = nlohmann::json::parse(line, nullptr, false);
                if (j.is_discarded() || !j.contains("cid"))
                    throw Error(ErrorKind::journal_corrupt,
                                "bad pin journal line: " + line);
                pins_.insert(j["cid"].get<std::string>());
            }
        }
        pin_journal_.open(pin_journal_path_);
    }

    BackendKind kind() const override { return BackendKind::local; }

    const std::filesystem::path& root() const { return root_; }

    std::filesystem::path object_path(std::string_view cid_text) const {
        return root_ / "objects" / std::string(cid_text.substr(0, 2)) / std::string(cid_text);
    }

    PutResult put(std::string_view content) override {
        metrics::Stopwatch timer;
        std::string cid_text = local_cid_text(content);
        write_object(cid_text, [&](std::ofstream& out) { out.write(content.data(), content.size()); });
        return finish_put(cid_text, content.size(), timer.elapsed_s());
    }

    PutResult put_file(const std::filesystem::path& file) override {
        metrics::Stopwatch timer;
        std::ifstream in(file, std::ios::binary);
        if (!in)
            throw Error(ErrorKind::io_error, "cannot read " + file.string());

        // Single pass: hash and spool to a temp object simultaneously,
        // 8 MiB at a time, so memory stays flat for any file size.
        Sha256 hasher;
        auto tmp = temp_path();
        std::uint64_t total = 0;
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw map_write_error(tmp);
            std::string buf(kStreamChunkBytes, '\0');
            while (in) {
                in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
                std::streamsize n = in.gcount();
                if (n <= 0) break;
                hasher.update(buf.data(), static_cast<std::size_t>(n));
                out.write(buf.data(), n);
                if (!out) throw map_write_error(tmp);
                total += static_cast<std::uint64_t>(n);
            }
            out.flush();
            if (!out) throw map_write_error(tmp);
        }
        std::string cid_text = local_cid_from_digest(hasher.finish());
        promote_temp(tmp, cid_text);
        return finish_put(cid_text, total, timer.elapsed_s());
    }

    std::string get(const Cid& cid, double* elapsed_s = nullptr) override {
        metrics::Stopwatch timer;
        auto digest = digest_from_local_cid(cid.text);
        auto path = object_path(cid.text);
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw Error(ErrorKind::not_found, "no object for CID " + cid.text);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (sha256(bytes) != digest)
            throw Error(ErrorKind::integrity_mismatch,
                        "stored object no longer hashes to " + cid.text);
        if (elapsed_s) *elapsed_s = timer.elapsed_s();
        return bytes;
    }

    ContentStat pin(const Cid& cid) override {
        ContentStat st = stat_unlocked(cid);
        std::lock_guard lock(pin_mu_);
        if (!pins_.contains(cid.text)) {
            nlohmann::json j{{"cid", cid.text}, {"timestamp_ms", metrics::now_utc_ms()}};
            pin_journal_.append_line(j.dump());
            pins_.insert(cid.text);
        }
        st.pinned = true;
        return st;
    }

    ContentStat stat(const Cid& cid) override {
        ContentStat st = stat_unlocked(cid);
        std::lock_guard lock(pin_mu_);
        st.pinned = pins_.contains(cid.text);
        return st;
    }

private:
    ContentStat stat_unlocked(const Cid& cid) const {
        namespace fs = std::filesystem;
        auto path = object_path(cid.text);
        std::error_code ec;
        auto size = fs::file_size(path, ec);
        if (ec)
            throw Error(ErrorKind::not_found, "no object for CID " + cid.text);
        ContentStat st;
        st.size_bytes = size;
        auto ftime = fs::last_write_time(path, ec);
        if (!ec) {
            auto sys = std::chrono::file_clock::to_sys(ftime);
            st.created_at_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   sys.time_since_epoch())
                                   .count();
        }
        return st;
    }

    std::filesystem::path temp_path() const {
        static thread_local std::mt19937_64 rng{std::random_device{}()};
        return root_ / "objects" / (".tmp-" + std::to_string(rng()));
    }

    Error map_write_error(const std::filesystem::path& p) const {
        ErrorKind kind = (errno == ENOSPC || errno == EDQUOT) ? ErrorKind::storage_full
                                                              : ErrorKind::io_error;
        return Error(kind, "write failed for " + p.string() + ": " + std::strerror(errno));
    }

    template <class WriteFn>
    void write_object(const std::string& cid_text, WriteFn&& write_fn) {
        auto tmp = temp_path();
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw map_write_error(tmp);
            write_fn(out);
            out.flush();
            if (!out) throw map_write_error(tmp);
        }
        promote_temp(tmp, cid_text);
    }

    // Rename into place; concurrent puts of identical content race benignly
    // because both temp files hold the same bytes.
    void promote_temp(const std::filesystem::path& tmp, const std::string& cid_text) {
        namespace fs = std::filesystem;
        auto final_path = object_path(cid_text);
        std::error_code ec;
        fs::create_directories(final_path.parent_path(), ec);
        if (fs::exists(final_path)) {
            fs::remove(tmp, ec);
            return;
        }
        sync_file(tmp);
        fs::rename(tmp, final_path, ec);
        if (ec) {
            fs::remove(tmp);
            throw Error(ErrorKind::io_error,
                        "cannot place object " + cid_text + ": " + ec.message());
        }
    }

    static void sync_file(const std::filesystem::path& p) {
        int fd = ::open(p.c_str(), O_RDONLY | O_CLOEXEC);
        if (fd >= 0) {
            ::fsync(fd);
            ::close(fd);
        }
    }

    PutResult finish_put(const std::string& cid_text, std::uint64_t size, double elapsed_s) {
        PutResult r;
        r.cid = Cid{cid_text, BackendKind::local};
        r.metrics.size_bytes = size;
        r.metrics.upload_time_s = elapsed_s;
        r.metrics.empty_content = (size == 0);
        r.metrics.bandwidth_kb_s =
            (elapsed_s > 0.0) ? metrics::bandwidth_kb_s(size, elapsed_s) : 0.0;
        return r;
    }

    std::filesystem::path root_;
    std::filesystem::path pin_journal_path_;
    AppendJournal pin_journal_;
    std::mutex pin_mu_;
    std::unordered_set<std::string> pins_;
};

} // namespace ipfspipe::cas
