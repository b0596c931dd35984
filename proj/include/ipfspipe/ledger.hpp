#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ipfspipe/errors.hpp"
#include "ipfspipe/hash.hpp"
#include "ipfspipe/journal.hpp"
#include "ipfspipe/metrics.hpp"

namespace ipfspipe::ledger {

// Deterministic gas model, affine in CID byte length. Defaults are
// calibrated so a 46-byte CID costs 752110 gas / 654008 tx cost units.
struct GasSchedule {
    std::uint64_t gas_base = 747510;
    std::uint64_t gas_per_byte = 100;
    std::uint64_t intrinsic_overhead = 98102;
    std::uint64_t deploy_gas = 1500000;
};

struct DataRecord {
    std::string ipfs_hash;
    std::int64_t timestamp_ms = 0;  // commit time
    std::uint64_t store_time_ms = 0; // submit-to-commit wall clock
};

struct TxReceipt {
    std::uint64_t block_number = 0;
    std::string tx_hash; // "0x" + 64 lowercase hex chars
    std::uint64_t gas_used = 0;
    std::uint64_t tx_cost_units = 0;
    std::string user;
};

struct LedgerEvent {
    std::string name; // DataStored | DataRetrieved
    std::string user;
    std::string cid;
    std::int64_t timestamp_ms = 0;
    std::uint64_t duration_ms = 0; // store time or age at retrieval
};

struct RetrievedData {
    std::string cid;
    std::int64_t age_ms = 0;
};

inline std::string tx_canonical(std::uint64_t block, const std::string& user,
                                const std::string& op, const std::string& payload,
                                std::int64_t timestamp_ms) {
    return std::to_string(block) + "\n" + user + "\n" + op + "\n" + payload + "\n" +
           std::to_string(timestamp_ms);
}

inline std::string tx_hash_for(std::uint64_t block, const std::string& user,
                               const std::string& op, const std::string& payload,
                               std::int64_t timestamp_ms) {
    return "0x" + sha256_hex(tx_canonical(block, user, op, payload, timestamp_ms));
}

inline std::uint64_t gas_for_store(const GasSchedule& s, std::size_t cid_bytes) {
    return s.gas_base + s.gas_per_byte * static_cast<std::uint64_t>(cid_bytes);
}

inline std::uint64_t tx_cost_units(const GasSchedule& s, std::uint64_t gas_used) {
    return gas_used > s.intrinsic_overhead ? gas_used - s.intrinsic_overhead : 0;
}

// Per-user append-only CID registry with gas accounting and an ndjson
// journal. Replaying the journal rebuilds the identical ledger.
class Ledger {
public:
    struct Deployed {
        std::unique_ptr<Ledger> ledger;
        TxReceipt receipt;
    };

    static Deployed deploy(const std::filesystem::path& journal_path, GasSchedule schedule = {}) {
        namespace fs = std::filesystem;
        std::error_code ec;
        if (fs::exists(journal_path) && fs::file_size(journal_path, ec) > 0)
            throw Error(ErrorKind::invalid_argument,
                        "journal already exists, load it instead: " + journal_path.string());

        auto ledger = std::unique_ptr<Ledger>(new Ledger(schedule));
        ledger->journal_.open(journal_path);

        std::int64_t ts = metrics::now_utc_ms();
        TxReceipt receipt;
        receipt.block_number = 1;
        receipt.user = "0x0000000000000000000000000000000000000000";
        receipt.gas_used = schedule.deploy_gas;
        receipt.tx_cost_units = tx_cost_units(schedule, schedule.deploy_gas);
        std::string payload = schedule_json(schedule);
        receipt.tx_hash = tx_hash_for(1, receipt.user, "deploy", payload, ts);

        ledger->append_journal_line(make_line(receipt, "deploy", payload, ts));
        ledger->head_block_ = 1;
        ledger->receipts_.push_back(receipt);
        return Deployed{std::move(ledger), receipt};
    }

    static std::unique_ptr<Ledger> load(const std::filesystem::path& journal_path) {
        auto lines = read_journal_lines(journal_path);
        if (lines.empty())
            throw Error(ErrorKind::journal_corrupt, "empty ledger journal");

        std::unique_ptr<Ledger> ledger;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            auto j = nlohmann::json::parse(lines[i], nullptr, false);
            if (j.is_discarded())
                throw Error(ErrorKind::journal_corrupt,
                            "unparseable journal line " + std::to_string(i));
            try {
                if (i == 0) {
                    ledger = replay_deploy(j);
                } else {
                    ledger->replay_line(j);
                }
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorKind::journal_corrupt,
                            "journal line " + std::to_string(i) + ": " + e.what());
            }
        }
        ledger->journal_.open(journal_path);
        return ledger;
    }

    // Appends the CID to the user's list, charging gas by CID length.
    // The journal line is durable before in-memory state changes.
    std::pair<TxReceipt, DataRecord> store_data(const std::string& user, const std::string& cid) {
        metrics::Stopwatch submit_clock;
        if (cid.empty())
            throw Error(ErrorKind::invalid_argument, "empty CID rejected");

        std::unique_lock lock(state_mu_);
        std::int64_t ts = metrics::now_utc_ms();
        TxReceipt receipt;
        receipt.block_number = head_block_ + 1;
        receipt.user = user;
        receipt.gas_used = gas_for_store(schedule_, cid.size());
        receipt.tx_cost_units = tx_cost_units(schedule_, receipt.gas_used);
        receipt.tx_hash = tx_hash_for(receipt.block_number, user, "store_data", cid, ts);

        DataRecord record;
        record.ipfs_hash = cid;
        record.timestamp_ms = ts;
        record.store_time_ms =
            static_cast<std::uint64_t>(submit_clock.elapsed_s() * 1000.0);

        auto line = make_line(receipt, "store_data", cid, ts);
        line["store_time_ms"] = record.store_time_ms;
        append_journal_line(line);

        head_block_ = receipt.block_number;
        receipts_.push_back(receipt);
        records_[user].push_back(record);
        events_.push_back({"DataStored", user, cid, ts, record.store_time_ms});
        return {receipt, record};
    }

    // Read-only on ledger state: no gas, no block increment. age_ms is the
    // time since the record was stored, the contract's retrievalTimeTaken.
    RetrievedData retrieve_data(const std::string& user, std::size_t index) {
        std::string cid;
        std::int64_t age_ms = 0;
        std::int64_t ts = 0;
        std::uint64_t head = 0;
        {
            std::shared_lock lock(state_mu_);
            auto it = records_.find(user);
            std::size_t count = (it == records_.end()) ? 0 : it->second.size();
            if (index >= count)
                throw Error(ErrorKind::index_out_of_range,
                            "index " + std::to_string(index) + " >= count " +
                                std::to_string(count));
            const DataRecord& rec = it->second[index];
            ts = metrics::now_utc_ms();
            age_ms = ts - rec.timestamp_ms;
            if (age_ms < 0) age_ms = 0;
            cid = rec.ipfs_hash;
            head = head_block_;
        }

        nlohmann::json line{{"block", head},
                            {"tx_hash", tx_hash_for(head, user, "data_retrieved", cid, ts)},
                            {"op", "data_retrieved"},
                            {"user", user},
                            {"payload", cid},
                            {"timestamp_ms", ts},
                            {"gas_used", 0},
                            {"tx_cost_units", 0},
                            {"age_ms", age_ms}};
        append_journal_line(line);
        {
            std::unique_lock lock(state_mu_);
            events_.push_back(
                {"DataRetrieved", user, cid, ts, static_cast<std::uint64_t>(age_ms)});
        }
        return {cid, age_ms};
    }

    std::size_t get_data_count(const std::string& user) const {
        std::shared_lock lock(state_mu_);
        auto it = records_.find(user);
        return it == records_.end() ? 0 : it->second.size();
    }

    std::vector<DataRecord> records(const std::string& user) const {
        std::shared_lock lock(state_mu_);
        auto it = records_.find(user);
        return it == records_.end() ? std::vector<DataRecord>{} : it->second;
    }

    std::vector<TxReceipt> receipts() const {
        std::shared_lock lock(state_mu_);
        return receipts_;
    }

    std::vector<LedgerEvent> events() const {
        std::shared_lock lock(state_mu_);
        return events_;
    }

    std::uint64_t head_block() const {
        std::shared_lock lock(state_mu_);
        return head_block_;
    }

    const GasSchedule& schedule() const { return schedule_; }

private:
    explicit Ledger(GasSchedule schedule) : schedule_(schedule) {}

    static std::string schedule_json(const GasSchedule& s) {
        nlohmann::json j{{"gas_base", s.gas_base},
                         {"gas_per_byte", s.gas_per_byte},
                         {"intrinsic_overhead", s.intrinsic_overhead},
                         {"deploy_gas", s.deploy_gas}};
        return j.dump();
    }

    static nlohmann::json make_line(const TxReceipt& r, const std::string& op,
                                    const std::string& payload, std::int64_t ts) {
        return nlohmann::json{{"block", r.block_number}, {"tx_hash", r.tx_hash},
                              {"op", op},               {"user", r.user},
                              {"payload", payload},     {"timestamp_ms", ts},
                              {"gas_used", r.gas_used}, {"tx_cost_units", r.tx_cost_units}};
    }

    void append_journal_line(const nlohmann::json& j) {
        std::lock_guard lock(journal_mu_);
        journal_.append_line(j.dump());
    }

    static std::unique_ptr<Ledger> replay_deploy(const nlohmann::json& j) {
        if (j.at("op").get<std::string>() != "deploy" || j.at("block").get<std::uint64_t>() != 1)
            throw Error(ErrorKind::journal_corrupt, "journal does not start with a deploy");
        auto payload = j.at("payload").get<std::string>();
        auto sj = nlohmann::json::parse(payload);
        GasSchedule s;
        s.gas_base = sj.at("gas_base").get<std::uint64_t>();
        s.gas_per_byte = sj.at("gas_per_byte").get<std::uint64_t>();
        s.intrinsic_overhead = sj.at("intrinsic_overhead").get<std::uint64_t>();
        s.deploy_gas = sj.at("deploy_gas").get<std::uint64_t>();

        auto ledger = std::unique_ptr<Ledger>(new Ledger(s));
        TxReceipt receipt = ledger->verified_receipt(j, "deploy", payload);
        if (receipt.gas_used != s.deploy_gas)
            throw Error(ErrorKind::journal_corrupt, "deploy gas does not match schedule");
        ledger->head_block_ = 1;
        ledger->receipts_.push_back(receipt);
        return ledger;
    }

    void replay_line(const nlohmann::json& j) {
        auto op = j.at("op").get<std::string>();
        auto payload = j.at("payload").get<std::string>();
        auto ts = j.at("timestamp_ms").get<std::int64_t>();
        auto user = j.at("user").get<std::string>();

        if (op == "store_data") {
            TxReceipt receipt = verified_receipt(j, op, payload);
            if (receipt.block_number != head_block_ + 1)
                throw Error(ErrorKind::journal_corrupt,
                            "non-contiguous block " + std::to_string(receipt.block_number));
            if (receipt.gas_used != gas_for_store(schedule_, payload.size()) ||
                receipt.tx_cost_units != tx_cost_units(schedule_, receipt.gas_used))
                throw Error(ErrorKind::journal_corrupt, "gas accounting mismatch on replay");
            DataRecord record{payload, ts, j.value("store_time_ms", std::uint64_t{0})};
            head_block_ = receipt.block_number;
            receipts_.push_back(receipt);
            records_[user].push_back(record);
            events_.push_back({"DataStored", user, payload, ts, record.store_time_ms});
        } else if (op == "data_retrieved") {
            auto expect = tx_hash_for(j.at("block").get<std::uint64_t>(), user, op, payload, ts);
            if (j.at("tx_hash").get<std::string>() != expect)
                throw Error(ErrorKind::journal_corrupt, "event hash mismatch on replay");
            events_.push_back({"DataRetrieved", user, payload, ts,
                               j.value("age_ms", std::uint64_t{0})});
        } else {
            throw Error(ErrorKind::journal_corrupt, "unknown journal op: " + op);
        }
    }

    TxReceipt verified_receipt(const nlohmann::json& j, const std::string& op,
                               const std::string& payload) const {
        TxReceipt r;
        r.block_number = j.at("block").get<std::uint64_t>();
        r.tx_hash = j.at("tx_hash").get<std::string>();
        r.gas_used = j.at("gas_used").get<std::uint64_t>();
        r.tx_cost_units = j.at("tx_cost_units").get<std::uint64_t>();
        r.user = j.at("user").get<std::string>();
        auto ts = j.at("timestamp_ms").get<std::int64_t>();
        if (r.tx_hash != tx_hash_for(r.block_number, r.user, op, payload, ts))
            throw Error(ErrorKind::journal_corrupt,
                        "tx hash mismatch at block " + std::to_string(r.block_number));
        return r;
    }

    GasSchedule schedule_;
    mutable std::shared_mutex state_mu_;
    std::mutex journal_mu_;
    AppendJournal journal_;
    std::uint64_t head_block_ = 0;
    std::unordered_map<std::string, std::vector<DataRecord>> records_;
    std::vector<TxReceipt> receipts_;
    std::vector<LedgerEvent> events_;
};

} // namespace ipfspipe::ledger
