#include <csignal>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stop_token>

#include <CLI11.hpp>
#include <json.hpp>

#include "ipfspipe/pipeline.hpp"

using namespace ipfspipe;
namespace pl = ipfspipe::pipeline;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPerFileFailures = 1;
constexpr int kExitFatal = 2;

std::stop_source g_stop; // flipped by SIGINT/SIGTERM

void install_signal_handlers() {
    struct sigaction sa{};
    sa.sa_handler = [](int) { g_stop.request_stop(); };
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);
}

std::string truncate_middle(const std::string& s, std::size_t head, std::size_t tail) {
    if (s.size() <= head + tail + 3) return s;
    return s.substr(0, head) + "..." + s.substr(s.size() - tail);
}

// Settings resolution: built-in defaults, then the config file, then flags.
struct Settings {
    pl::PipelineConfig pipeline;
    fs::path data_dir = "ipfspipe-data";
    bool store_dir_set = false, ledger_set = false, chain_set = false, report_set = false;

    void apply_data_dir() {
        if (!store_dir_set) pipeline.store_dir = data_dir / "cas";
        if (!ledger_set) pipeline.ledger_journal = data_dir / "ledger.ndjson";
        if (!chain_set) pipeline.chain_journal = data_dir / "chain.ndjson";
        if (!report_set) pipeline.report_dir = data_dir / "reports";
    }
};

void load_config_file(Settings& s, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::invalid_argument, "cannot read config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::invalid_argument,
                    "config " + path.string() + " is not valid JSON: " + e.what());
    }

    auto& p = s.pipeline;
    if (j.contains("data_dir")) s.data_dir = j["data_dir"].get<std::string>();
    if (j.contains("root_dir")) p.watch.root_dir = j["root_dir"].get<std::string>();
    if (j.contains("scan_interval_s")) p.watch.scan_interval_s = j["scan_interval_s"].get<double>();
    if (j.contains("stop_after_s")) {
        if (j["stop_after_s"].is_null())
            p.watch.stop_after_s = std::nullopt;
        else
            p.watch.stop_after_s = j["stop_after_s"].get<double>();
    }
    if (j.contains("ignore_hidden")) p.watch.ignore_hidden = j["ignore_hidden"].get<bool>();
    if (j.contains("backend"))
        p.backend = j["backend"].get<std::string>() == "remote" ? cas::BackendKind::remote
                                                                : cas::BackendKind::local;
    if (j.contains("register_on")) {
        p.register_on = pl::RegisterOn{false, false};
        for (const auto& t : j["register_on"]) {
            if (t.get<std::string>() == "ledger") p.register_on.ledger = true;
            if (t.get<std::string>() == "lightchain") p.register_on.lightchain = true;
        }
    }
    if (j.contains("store_dir")) { p.store_dir = j["store_dir"].get<std::string>(); s.store_dir_set = true; }
    if (j.contains("ledger_journal")) { p.ledger_journal = j["ledger_journal"].get<std::string>(); s.ledger_set = true; }
    if (j.contains("chain_journal")) { p.chain_journal = j["chain_journal"].get<std::string>(); s.chain_set = true; }
    if (j.contains("report_dir")) { p.report_dir = j["report_dir"].get<std::string>(); s.report_set = true; }
    if (j.contains("user_address")) p.user_address = j["user_address"].get<std::string>();
    if (j.contains("tdp_watts")) p.tdp_watts = j["tdp_watts"].get<double>();
    if (j.contains("daemon_host")) p.remote.host = j["daemon_host"].get<std::string>();
    if (j.contains("daemon_api_port")) p.remote.api_port = j["daemon_api_port"].get<int>();
    if (j.contains("gateway_port")) p.remote.gateway_port = j["gateway_port"].get<int>();
    if (j.contains("gateway_reads")) p.remote.gateway_reads = j["gateway_reads"].get<bool>();
    if (j.contains("gas_schedule")) {
        const auto& g = j["gas_schedule"];
        if (g.contains("gas_base")) p.gas_schedule.gas_base = g["gas_base"].get<std::uint64_t>();
        if (g.contains("gas_per_byte"))
            p.gas_schedule.gas_per_byte = g["gas_per_byte"].get<std::uint64_t>();
        if (g.contains("intrinsic_overhead"))
            p.gas_schedule.intrinsic_overhead = g["intrinsic_overhead"].get<std::uint64_t>();
        if (g.contains("deploy_gas")) p.gas_schedule.deploy_gas = g["deploy_gas"].get<std::uint64_t>();
    }
}

int run_watch(Settings& s) {
    install_signal_handlers();
    std::cout << "watching " << s.pipeline.watch.root_dir.string() << " every "
              << s.pipeline.watch.scan_interval_s << " s";
    if (s.pipeline.watch.stop_after_s)
        std::cout << " for up to " << *s.pipeline.watch.stop_after_s << " s";
    std::cout << "\n";
    auto report = pl::run_pipeline(s.pipeline, g_stop.get_token());
    std::cout << "watch finished: " << report.scans << " scans, " << report.events
              << " events, " << report.files.size() << " files, " << report.failures
              << " failures\n";
    for (const auto& p : report.report_paths) std::cout << "report: " << p.string() << "\n";
    return report.failures == 0 ? kExitOk : kExitPerFileFailures;
}

int run_upload(Settings& s, const std::vector<std::string>& files) {
    auto store = pl::open_store(s.pipeline);
    std::unique_ptr<ledger::Ledger> led;
    std::unique_ptr<lightchain::Chain> chain;
    if (s.pipeline.register_on.ledger)
        led = pl::open_or_deploy_ledger(s.pipeline.ledger_journal, s.pipeline.gas_schedule);
    if (s.pipeline.register_on.lightchain)
        chain = pl::open_or_create_chain(s.pipeline.chain_journal);

    metrics::SystemProbe probe;
    pl::ProcessOptions opts;
    opts.register_on = s.pipeline.register_on;
    opts.user_address = s.pipeline.user_address;
    opts.tdp_watts = s.pipeline.tdp_watts;
    opts.probe = &probe;

    std::size_t failures = 0;
    for (const auto& file : files) {
        auto outcome = pl::process_file(file, *store, led.get(), chain.get(), opts);
        if (!outcome.ok()) {
            ++failures;
            std::cerr << file << ": " << outcome.error << "\n";
            continue;
        }
        std::cout << file << " -> " << outcome.cid << "  ("
                  << watcher::format_file_size(outcome.metrics.size_bytes) << ", "
                  << metrics::format_double(outcome.metrics.upload_time_s, 4) << " s";
        if (outcome.receipt) std::cout << ", block " << outcome.receipt->block_number;
        if (outcome.chain_index) std::cout << ", chain #" << *outcome.chain_index;
        std::cout << ")\n";
    }
    return failures == 0 ? kExitOk : kExitPerFileFailures;
}

int run_retrieve(Settings& s, std::size_t index, const std::string& out_file) {
    auto result = pl::retrieve_by_index(s.pipeline, s.pipeline.user_address, index);
    std::cout << "cid: " << result.cid << "\n"
              << "verdict: " << pl::to_string(result.verdict) << "\n"
              << "lookup: " << metrics::format_double(result.lookup_s * 1000.0, 3) << " ms, fetch: "
              << metrics::format_double(result.fetch_s * 1000.0, 3) << " ms, age: "
              << result.age_ms << " ms\n";
    if (!out_file.empty() && result.verdict != pl::RetrieveVerdict::unavailable) {
        std::ofstream out(out_file, std::ios::binary | std::ios::trunc);
        out.write(result.bytes.data(), static_cast<std::streamsize>(result.bytes.size()));
        std::cout << "saved " << result.bytes.size() << " bytes to " << out_file << "\n";
    }
    return result.verdict == pl::RetrieveVerdict::verified ||
                   result.verdict == pl::RetrieveVerdict::unchecked
               ? kExitOk
               : kExitPerFileFailures;
}

int run_chain_verify(Settings& s) {
    auto chain = lightchain::Chain::load(s.pipeline.chain_journal);
    auto links = chain->verify();
    if (!links.ok) {
        std::cout << "chain links INVALID at index " << links.first_bad_index << "\n";
        return kExitPerFileFailures;
    }
    std::cout << "chain links valid (" << chain->size() << " blocks)\n";

    auto store = pl::open_store(s.pipeline);
    bool all_verified = true;
    for (const auto& row : lightchain::audit_chain(*chain, *store)) {
        std::cout << "block " << row.block << "  " << truncate_middle(row.cid, 10, 5) << "  "
                  << lightchain::to_string(row.verdict) << "\n";
        all_verified = all_verified && row.verdict == lightchain::Verdict::verified;
    }
    return all_verified ? kExitOk : kExitPerFileFailures;
}

int run_chain_show(Settings& s, const std::string& csv_path) {
    auto chain = lightchain::Chain::load(s.pipeline.chain_journal);
    auto store = pl::open_store(s.pipeline);
    auto rows = lightchain::audit_chain(*chain, *store);

    if (!csv_path.empty()) {
        std::vector<metrics::CsvRow> csv;
        for (const auto& r : rows)
            csv.push_back({std::to_string(r.block), r.cid,
                           metrics::format_double(r.fetch_time_s, 4),
                           std::to_string(r.size_bytes), r.stored_hash, r.fetched_hash});
        metrics::write_report(csv, metrics::ReportSchema::chain_table12, csv_path);
        std::cout << "wrote " << rows.size() << " rows to " << csv_path << "\n";
        return kExitOk;
    }

    std::cout << "Block  CID                 Time (s)  Size (B)  Stored Hash          "
                 "Fetched Hash\n";
    std::cout << "0      -                   -         -         -                    -\n";
    for (const auto& r : rows) {
        std::cout << r.block << "      " << truncate_middle(r.cid, 10, 5) << "  "
                  << metrics::format_double(r.fetch_time_s, 4) << "    " << r.size_bytes << "  "
                  << truncate_middle(r.stored_hash, 10, 7) << "  "
                  << (r.fetched_hash.empty() ? std::string("-")
                                             : truncate_middle(r.fetched_hash, 10, 7))
                  << "  " << lightchain::to_string(r.verdict) << "\n";
    }
    return kExitOk;
}

// Looks up the CID a store receipt committed, via the user's records.
std::string find_cid(const ledger::Ledger* led, const ledger::TxReceipt& receipt) {
    std::size_t seen = 0;
    for (const auto& r : led->receipts()) {
        if (r.block_number == 1) continue;
        if (r.user == receipt.user) {
            if (r.block_number == receipt.block_number) {
                auto records = led->records(receipt.user);
                return seen < records.size() ? records[seen].ipfs_hash : "";
            }
            ++seen;
        }
    }
    return "";
}

int run_ledger_show(Settings& s, const std::string& csv_path, const std::string& user) {
    auto led = ledger::Ledger::load(s.pipeline.ledger_journal);
    auto receipts = led->receipts();

    if (!csv_path.empty()) {
        std::vector<metrics::CsvRow> csv;
        for (const auto& r : receipts) {
            if (r.block_number == 1) continue; // deploy carries no CID
            auto age = std::string("-");
            csv.push_back({std::to_string(r.block_number), r.tx_hash, std::to_string(r.gas_used),
                           std::to_string(r.tx_cost_units), age, find_cid(led.get(), r)});
        }
        metrics::write_report(csv, metrics::ReportSchema::ledger_table8, csv_path);
        std::cout << "wrote " << csv.size() << " rows to " << csv_path << "\n";
        return kExitOk;
    }

    std::cout << "block  tx                     gas      cost     user\n";
    for (const auto& r : receipts)
        std::cout << r.block_number << "      " << truncate_middle(r.tx_hash, 9, 8) << "  "
                  << r.gas_used << "  " << r.tx_cost_units << "  "
                  << truncate_middle(r.user, 9, 8) << "\n";
    const std::string& who = user.empty() ? s.pipeline.user_address : user;
    std::cout << "records for " << who << ": " << led->get_data_count(who) << "\n";
    return kExitOk;
}

int run_bench(Settings& s, std::vector<std::uint64_t> sizes, const std::string& out_dir,
              const std::string& fill, std::uint64_t seed) {
    pl::BenchOptions options;
    options.fill = fill == "random" ? pl::GeneratorConfig::Fill::random
                                    : pl::GeneratorConfig::Fill::zeros;
    options.seed = seed;
    options.tdp_watts = s.pipeline.tdp_watts;
    options.gas_schedule = s.pipeline.gas_schedule;
    options.user_address = s.pipeline.user_address;
    options.remote = s.pipeline.remote;

    auto result = pl::bench(sizes, s.pipeline.backend, out_dir, options);
    std::size_t failures = 0;
    for (const auto& row : result.rows) {
        if (!row.outcome.ok()) {
            ++failures;
            std::cerr << row.outcome.path.string() << ": " << row.outcome.error << "\n";
            continue;
        }
        std::cout << row.size_mb << " MB: upload "
                  << metrics::format_double(row.outcome.metrics.upload_time_s, 4) << " s, retrieve "
                  << metrics::format_double(row.retrieval.fetch_s, 4) << " s, "
                  << pl::to_string(row.retrieval.verdict) << "\n";
    }
    for (const auto& p : result.csv_paths) std::cout << "report: " << p.string() << "\n";
    return failures == 0 ? kExitOk : kExitPerFileFailures;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decentralized storage pipeline: watch, upload, register, retrieve"};
    app.require_subcommand(1);

    Settings s;
    std::string config_file;
    app.add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);

    // shared overrides
    std::string backend, register_csv, daemon;
    app.add_option("--data-dir", s.data_dir, "base directory for store, journals and reports");
    app.add_option("--backend", backend, "local | remote")
        ->check(CLI::IsMember({"local", "remote"}));
    app.add_option("--register", register_csv, "comma list of ledger,lightchain");
    app.add_option("--user", s.pipeline.user_address, "user address for ledger records");
    app.add_option("--tdp", s.pipeline.tdp_watts, "TDP watts for the energy model");
    app.add_option("--daemon", daemon, "IPFS API address host:port");
    app.add_option("--gateway-port", s.pipeline.remote.gateway_port, "IPFS gateway port");
    app.add_flag("--gateway-reads", s.pipeline.remote.gateway_reads,
                 "fetch content from the gateway instead of the API");
    std::string store_dir, ledger_journal, chain_journal, report_dir;
    app.add_option("--store-dir", store_dir, "local object store root");
    app.add_option("--ledger-journal", ledger_journal, "ledger journal path");
    app.add_option("--chain-journal", chain_journal, "chain journal path");
    app.add_option("--report-dir", report_dir, "report output directory");

    // gen
    auto* gen = app.add_subcommand("gen", "generate dummy files with increasing gaps");
    std::uint64_t gen_start = 5, gen_gap = 5, gen_max = 550, gen_seed = 1;
    std::string gen_out = "generated files", gen_fill = "zeros";
    gen->add_option("start", gen_start, "initial size (MB)");
    gen->add_option("gap", gen_gap, "initial gap (MB)");
    gen->add_option("max", gen_max, "maximum size (MB)");
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--fill", gen_fill, "zeros | random")
        ->check(CLI::IsMember({"zeros", "random"}));
    gen->add_option("--seed", gen_seed, "seed for random fill");

    // watch
    auto* watch = app.add_subcommand("watch", "watch a directory and run the pipeline");
    watch->add_option("--root", s.pipeline.watch.root_dir, "directory to watch");
    watch->add_option("--interval", s.pipeline.watch.scan_interval_s, "scan interval seconds");
    double stop_after = 1200.0;
    bool no_stop = false;
    watch->add_option("--stop-after", stop_after, "stop after this many seconds");
    watch->add_flag("--forever", no_stop, "watch until interrupted");

    // upload
    auto* upload = app.add_subcommand("upload", "upload files once, no watcher");
    std::vector<std::string> upload_files;
    upload->add_option("files", upload_files, "files to upload")->required();

    // retrieve
    auto* retrieve = app.add_subcommand("retrieve", "retrieve by ledger index and verify");
    std::size_t retrieve_index = 0;
    std::string retrieve_out;
    retrieve->add_option("index", retrieve_index, "record index")->required();
    retrieve->add_option("--out", retrieve_out, "write fetched bytes here");

    // chain
    auto* chain_cmd = app.add_subcommand("chain", "chain inspection");
    chain_cmd->require_subcommand(1);
    auto* chain_verify = chain_cmd->add_subcommand("verify", "verify links and content");
    auto* chain_show = chain_cmd->add_subcommand("show", "print blocks, table-12 style");
    std::string chain_csv;
    chain_show->add_option("--csv", chain_csv, "write full-precision CSV here");

    // ledger
    auto* ledger_cmd = app.add_subcommand("ledger", "ledger inspection");
    ledger_cmd->require_subcommand(1);
    auto* ledger_show = ledger_cmd->add_subcommand("show", "print receipts");
    std::string ledger_csv, ledger_user;
    ledger_show->add_option("--csv", ledger_csv, "write table-8 style CSV here");
    ledger_show->add_option("--show-user", ledger_user, "user to count records for");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "upload/register/retrieve ladder benchmark");
    std::vector<std::uint64_t> bench_sizes{1, 2, 4};
    std::string bench_out = "bench-out", bench_fill = "zeros";
    std::uint64_t bench_seed = 1;
    bench_cmd->add_option("--sizes", bench_sizes, "file sizes in MB");
    bench_cmd->add_option("--out", bench_out, "output directory");
    bench_cmd->add_option("--fill", bench_fill, "zeros | random")
        ->check(CLI::IsMember({"zeros", "random"}));
    bench_cmd->add_option("--seed", bench_seed, "seed for random fill");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_file.empty()) load_config_file(s, config_file);

        // flags override the config file
        if (!backend.empty())
            s.pipeline.backend =
                backend == "remote" ? cas::BackendKind::remote : cas::BackendKind::local;
        if (!register_csv.empty()) {
            s.pipeline.register_on = pl::RegisterOn{false, false};
            std::stringstream ss(register_csv);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (item == "ledger") s.pipeline.register_on.ledger = true;
                else if (item == "lightchain") s.pipeline.register_on.lightchain = true;
                else throw Error(ErrorKind::invalid_argument, "unknown register target " + item);
            }
        }
        if (!daemon.empty()) {
            auto colon = daemon.rfind(':');
            if (colon == std::string::npos)
                throw Error(ErrorKind::invalid_argument, "--daemon expects host:port");
            s.pipeline.remote.host = daemon.substr(0, colon);
            s.pipeline.remote.api_port = std::stoi(daemon.substr(colon + 1));
        }
        if (!store_dir.empty()) { s.pipeline.store_dir = store_dir; s.store_dir_set = true; }
        if (!ledger_journal.empty()) { s.pipeline.ledger_journal = ledger_journal; s.ledger_set = true; }
        if (!chain_journal.empty()) { s.pipeline.chain_journal = chain_journal; s.chain_set = true; }
        if (!report_dir.empty()) { s.pipeline.report_dir = report_dir; s.report_set = true; }
        s.apply_data_dir();

        if (gen->parsed()) {
            pl::GeneratorConfig cfg;
            cfg.start_mb = gen_start;
            cfg.gap_mb = gen_gap;
            cfg.max_mb = gen_max;
            cfg.out_dir = gen_out;
            cfg.fill = gen_fill == "random" ? pl::GeneratorConfig::Fill::random
                                            : pl::GeneratorConfig::Fill::zeros;
            cfg.seed = gen_seed;
            auto files = pl::gen_files(cfg);
            for (const auto& f : files)
                std::cout << "created " << f.path.filename().string() << " of size " << f.size_mb
                          << " MB\n";
            std::cout << files.size() << " files in " << gen_out << "\n";
            return kExitOk;
        }
        if (watch->parsed()) {
            if (watch->count("--stop-after")) s.pipeline.watch.stop_after_s = stop_after;
            if (no_stop) s.pipeline.watch.stop_after_s = std::nullopt;
            return run_watch(s);
        }
        if (upload->parsed()) return run_upload(s, upload_files);
        if (retrieve->parsed()) return run_retrieve(s, retrieve_index, retrieve_out);
        if (chain_verify->parsed()) return run_chain_verify(s);
        if (chain_show->parsed()) return run_chain_show(s, chain_csv);
        if (ledger_show->parsed()) return run_ledger_show(s, ledger_csv, ledger_user);
        if (bench_cmd->parsed()) return run_bench(s, bench_sizes, bench_out, bench_fill, bench_seed);
        return kExitFatal;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFatal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFatal;
    }
}
