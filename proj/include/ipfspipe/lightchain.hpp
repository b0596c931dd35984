#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipfspipe/cas.hpp"
#include "ipfspipe/errors.hpp"
#include "ipfspipe/hash.hpp"
#include "ipfspipe/journal.hpp"
#include "ipfspipe/metrics.hpp"

namespace ipfspipe::lightchain {

struct Block {
    std::uint64_t index = 0;
    std::int64_t timestamp_ms = 0;
    std::string cid;       // empty for genesis
    std::string data_hash; // SHA-256 of the fetched content, hex
    std::string prev_hash;
    std::string block_hash;

    bool operator==(const Block&) const = default;
};

inline constexpr std::string_view kZeroHash =
    "0000000000000000000000000000000000000000000000000000000000000000";

// Canonical serialization the block hash commits to. CIDs and hex digests
// never contain newlines, so the field boundaries are unambiguous.
inline std::string block_canonical(std::uint64_t index, std::int64_t timestamp_ms,
                                   const std::string& cid, const std::string& data_hash,
                                   const std::string& prev_hash) {
    return std::to_string(index) + "\n" + std::to_string(timestamp_ms) + "\n" + cid + "\n" +
           data_hash + "\n" + prev_hash;
}

inline std::string block_hash_for(const Block& b) {
    return sha256_hex(block_canonical(b.index, b.timestamp_ms, b.cid, b.data_hash, b.prev_hash));
}

// The genesis block is a universal constant: index 0, timestamp 0, empty
// CID, all-zero hashes. Its block hash is pinned as a golden test vector.
inline Block genesis() {
    Block g;
    g.index = 0;
    g.timestamp_ms = 0;
    g.cid = "";
    g.data_hash = kZeroHash;
    g.prev_hash = kZeroHash;
    g.block_hash = block_hash_for(g);
    return g;
}

struct LinkCheck {
    bool ok = true;
    std::size_t first_bad_index = 0;
};

// Recomputes every block hash and checks the prev_hash chain. Reports the
// smallest failing index on any mismatch.
inline LinkCheck verify_links(const std::vector<Block>& blocks) {
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const Block& b = blocks[i];
        if (b.index != i) return {false, i};
        if (i == 0) {
            if (b.prev_hash != kZeroHash) return {false, i};
        } else {
            if (b.prev_hash != blocks[i - 1].block_hash) return {false, i};
            if (b.timestamp_ms < blocks[i - 1].timestamp_ms) return {false, i};
        }
        if (block_hash_for(b) != b.block_hash) return {false, i};
    }
    return {true, 0};
}

enum class Verdict { verified, tampered, unavailable };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::verified: return "Verified";
        case Verdict::tampered: return "Tampered";
        case Verdict::unavailable: return "Unavailable";
    }
    return "?";
}

// Append-only hash-linked chain of (CID, content hash) bindings, persisted
// as one JSON block per line with fsync on every append.
class Chain {
public:
    // Starts a new chain at journal_path, writing the genesis block.
    static std::unique_ptr<Chain> create(const std::filesystem::path& journal_path) {
        namespace fs = std::filesystem;
        std::error_code ec;
        if (fs::exists(journal_path) && fs::file_size(journal_path, ec) > 0)
            throw Error(ErrorKind::invalid_argument,
                        "chain journal already exists, load it instead: " +
                            journal_path.string());
        auto chain = std::unique_ptr<Chain>(new Chain(journal_path));
        Block g = genesis();
        chain->journal_.open(journal_path);
        chain->journal_.append_line(block_json(g).dump());
        chain->blocks_.push_back(std::move(g));
        return chain;
    }

    // Replays the journal and rejects anything that does not verify.
    static std::unique_ptr<Chain> load(const std::filesystem::path& journal_path) {
        auto lines = read_journal_lines(journal_path);
        if (lines.empty())
            throw Error(ErrorKind::journal_corrupt, "empty chain journal");

        auto chain = std::unique_ptr<Chain>(new Chain(journal_path));
        for (std::size_t i = 0; i < lines.size(); ++i) {
            auto j = nlohmann::json::parse(lines[i], nullptr, false);
            if (j.is_discarded())
                throw Error(ErrorKind::journal_corrupt,
                            "unparseable chain journal line " + std::to_string(i));
            try {
                chain->blocks_.push_back(block_from_json(j));
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::journal_corrupt,
                            "chain journal line " + std::to_string(i) + ": " + e.what());
            }
        }
        if (chain->blocks_.front() != genesis())
            throw Error(ErrorKind::link_invalid, "journal does not start at genesis");
        auto check = verify_links(chain->blocks_);
        if (!check.ok)
            throw Error(ErrorKind::link_invalid,
                        "chain invalid at index " + std::to_string(check.first_bad_index));
        chain->journal_.open(journal_path);
        return chain;
    }

    const std::filesystem::path& journal_path() const { return journal_path_; }

    // Fetches the CID's content, hashes it, and appends the binding. The
    // block hits the journal before it becomes visible in memory; a failed
    // fetch appends nothing.
    Block save_to_chain(const cas::Cid& cid, cas::Store& store) {
        std::string content;
        try {
            content = store.get(cid);
        } catch (const Error& e) {
            throw Error(ErrorKind::fetch_failed,
                        "cannot fetch " + cid.text + " for chain append: " + e.what());
        }

        std::unique_lock lock(mu_);
        const Block& prev = blocks_.back();
        Block b;
        b.index = prev.index + 1;
        b.timestamp_ms = std::max(metrics::now_utc_ms(), prev.timestamp_ms);
        b.cid = cid.text;
        b.data_hash = sha256_hex(content);
        b.prev_hash = prev.block_hash;
        b.block_hash = block_hash_for(b);

        journal_.append_line(block_json(b).dump());
        blocks_.push_back(b);
        return b;
    }

    Block last_block() const {
        std::shared_lock lock(mu_);
        return blocks_.back();
    }

    std::vector<Block> blocks() const {
        std::shared_lock lock(mu_);
        return blocks_;
    }

    std::size_t size() const {
        std::shared_lock lock(mu_);
        return blocks_.size();
    }

    LinkCheck verify() const {
        std::shared_lock lock(mu_);
        return verify_links(blocks_);
    }

private:
    explicit Chain(std::filesystem::path journal_path)
        : journal_path_(std::move(journal_path)) {}

    static nlohmann::json block_json(const Block& b) {
        return nlohmann::json{{"index", b.index},         {"timestamp_ms", b.timestamp_ms},
                              {"cid", b.cid},             {"data_hash", b.data_hash},
                              {"prev_hash", b.prev_hash}, {"block_hash", b.block_hash}};
    }

    static Block block_from_json(const nlohmann::json& j) {
        Block b;
        b.index = j.at("index").get<std::uint64_t>();
        b.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
        b.cid = j.at("cid").get<std::string>();
        b.data_hash = j.at("data_hash").get<std::string>();
        b.prev_hash = j.at("prev_hash").get<std::string>();
        b.block_hash = j.at("block_hash").get<std::string>();
        return b;
    }

    std::filesystem::path journal_path_;
    mutable std::shared_mutex mu_;
    AppendJournal journal_;
    std::vector<Block> blocks_;
};

struct AuditRow {
    std::uint64_t block = 0;
    std::string cid;
    double fetch_time_s = 0.0;
    std::uint64_t size_bytes = 0;
    std::string stored_hash;
    std::string fetched_hash; // empty when the fetch failed
    Verdict verdict = Verdict::unavailable;
};

// Re-fetches every non-genesis block's content and compares hashes.
// A backend integrity error means the content exists but was altered,
// so it maps to Tampered; a missing or unreachable object is Unavailable.
inline std::vector<AuditRow> audit_chain(const Chain& chain, cas::Store& store) {
    std::vector<AuditRow> rows;
    auto blocks = chain.blocks();
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        const Block& b = blocks[i];
        AuditRow row;
        row.block = b.index;
        row.cid = b.cid;
        row.stored_hash = b.data_hash;
        try {
            double elapsed = 0.0;
            std::string content =
                store.get(cas::Cid{b.cid, store.kind()}, &elapsed);
            row.fetch_time_s = elapsed;
            row.size_bytes = content.size();
            row.fetched_hash = sha256_hex(content);
            row.verdict =
                (row.fetched_hash == b.data_hash) ? Verdict::verified : Verdict::tampered;
        } catch (const Error& e) {
            row.verdict = (e.kind() == ErrorKind::integrity_mismatch) ? Verdict::tampered
                                                                      : Verdict::unavailable;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Per-block verdicts for every non-genesis block, in chain order.
inline std::vector<Verdict> verify_chain(const Chain& chain, cas::Store& store) {
    std::vector<Verdict> verdicts;
    for (const auto& row : audit_chain(chain, store)) verdicts.push_back(row.verdict);
    return verdicts;
}

} // namespace ipfspipe::lightchain
