#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ipfspipe/cas.hpp"
#include "ipfspipe/lightchain.hpp"
#include "support.hpp"

using namespace ipfspipe;
using lightchain::Block;
using lightchain::Chain;
using lightchain::Verdict;

// Pinned via an independent SHA-256 of the canonical genesis serialization
// "0\n0\n\n" + 64 zeros + "\n" + 64 zeros.
static const std::string kGenesisHash =
    "ee71c230f841f72f041126787d092cce1eab67e07d472e20dca07cd706f3120e";

namespace {
struct ChainFixture {
    TempDir tmp;
    cas::LocalStore store;
    std::unique_ptr<Chain> chain;
    std::vector<cas::Cid> cids;

    ChainFixture() : store(tmp / "cas"), chain(Chain::create(tmp / "chain.ndjson")) {}

    void add_content(const std::string& content) {
        auto put = store.put(content);
        chain->save_to_chain(put.cid, store);
        cids.push_back(put.cid);
    }
};
} // namespace

TEST_CASE("genesis is a fixed constant", "[lightchain]") {
    auto g = lightchain::genesis();
    CHECK(g.index == 0);
    CHECK(g.timestamp_ms == 0);
    CHECK(g.cid.empty());
    CHECK(g.data_hash == std::string(64, '0'));
    CHECK(g.prev_hash == std::string(64, '0'));
    CHECK(g.block_hash == kGenesisHash);
    CHECK(lightchain::genesis() == g);
}

TEST_CASE("save_to_chain binds the CID to its content hash", "[lightchain]") {
    ChainFixture fx;
    fx.add_content("block one payload");

    auto last = fx.chain->last_block();
    CHECK(last.index == 1);
    CHECK(last.cid == fx.cids[0].text);
    CHECK(last.data_hash == sha256_hex("block one payload"));
    CHECK(last.prev_hash == kGenesisHash);
    CHECK(last.block_hash == lightchain::block_hash_for(last));
}

TEST_CASE("successive saves link prev_hash to the previous block", "[lightchain]") {
    ChainFixture fx;
    for (int i = 0; i < 4; ++i) fx.add_content("content #" + std::to_string(i));

    auto blocks = fx.chain->blocks();
    REQUIRE(blocks.size() == 5);
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        CHECK(blocks[i].index == i);
        CHECK(blocks[i].prev_hash == blocks[i - 1].block_hash);
        CHECK(blocks[i].timestamp_ms >= blocks[i - 1].timestamp_ms);
    }
    CHECK(fx.chain->verify().ok);
}

TEST_CASE("save with an unresolvable CID appends nothing", "[lightchain]") {
    ChainFixture fx;
    fx.add_content("real");

    cas::Cid bogus{cas::local_cid_text("never stored"), cas::BackendKind::local};
    try {
        fx.chain->save_to_chain(bogus, fx.store);
        FAIL("expected fetch-failed");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::fetch_failed);
    }
    CHECK(fx.chain->size() == 2);
    CHECK(fx.chain->verify().ok);
}

TEST_CASE("verify_chain: all verified, tampered object, deleted object", "[lightchain]") {
    ChainFixture fx;
    for (int i = 0; i < 4; ++i) fx.add_content("verify me #" + std::to_string(i));

    auto verdicts = lightchain::verify_chain(*fx.chain, fx.store);
    REQUIRE(verdicts.size() == 4);
    for (auto v : verdicts) CHECK(v == Verdict::verified);

    SECTION("flipping one byte of block 2's object marks only block 2 tampered") {
        auto path = fx.store.object_path(fx.cids[1].text);
        auto bytes = read_file(path);
        bytes[0] ^= 0x40;
        write_file(path, bytes);

        auto after = lightchain::verify_chain(*fx.chain, fx.store);
        REQUIRE(after.size() == 4);
        CHECK(after[0] == Verdict::verified);
        CHECK(after[1] == Verdict::tampered);
        CHECK(after[2] == Verdict::verified);
        CHECK(after[3] == Verdict::verified);
    }

    SECTION("deleting block 3's object marks it unavailable") {
        std::filesystem::remove(fx.store.object_path(fx.cids[2].text));
        auto after = lightchain::verify_chain(*fx.chain, fx.store);
        REQUIRE(after.size() == 4);
        CHECK(after[2] == Verdict::unavailable);
        CHECK(after[0] == Verdict::verified);
        CHECK(after[1] == Verdict::verified);
        CHECK(after[3] == Verdict::verified);
    }
}

TEST_CASE("verify_links catches any in-memory field mutation", "[lightchain]") {
    ChainFixture fx;
    for (int i = 0; i < 6; ++i) fx.add_content("payload " + std::to_string(i));
    auto blocks = fx.chain->blocks();
    REQUIRE(lightchain::verify_links(blocks).ok);

    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 60; ++trial) {
        auto mutated = blocks;
        std::size_t k = rng() % mutated.size();
        switch (rng() % 6) {
            case 0: mutated[k].cid += "x"; break;
            case 1: mutated[k].timestamp_ms += 1 + rng() % 1000; break;
            case 2: mutated[k].data_hash = sha256_hex("evil" + std::to_string(trial)); break;
            case 3: mutated[k].prev_hash = sha256_hex("forged"); break;
            case 4: mutated[k].block_hash = sha256_hex("rehash"); break;
            case 5: mutated[k].index += 1; break;
        }
        auto check = lightchain::verify_links(mutated);
        REQUIRE_FALSE(check.ok);
        CHECK(check.first_bad_index <= k);
    }
}

TEST_CASE("journal round trip reproduces identical block hashes", "[lightchain]") {
    TempDir tmp;
    cas::LocalStore store(tmp / "cas");
    auto journal = tmp / "chain.ndjson";
    std::vector<Block> original;
    {
        auto chain = Chain::create(journal);
        for (int i = 0; i < 3; ++i) {
            auto put = store.put("persisted " + std::to_string(i));
            chain->save_to_chain(put.cid, store);
        }
        original = chain->blocks();
    }

    auto reloaded = Chain::load(journal);
    auto blocks = reloaded->blocks();
    REQUIRE(blocks.size() == original.size());
    for (std::size_t i = 0; i < blocks.size(); ++i) CHECK(blocks[i] == original[i]);
    CHECK(reloaded->verify().ok);

    // appending after reload keeps the chain linked
    auto put = store.put("after reload");
    auto block = reloaded->save_to_chain(put.cid, store);
    CHECK(block.prev_hash == original.back().block_hash);
}

TEST_CASE("corrupted journals are rejected on load", "[lightchain]") {
    TempDir tmp;
    cas::LocalStore store(tmp / "cas");
    auto journal = tmp / "chain.ndjson";
    {
        auto chain = Chain::create(journal);
        for (int i = 0; i < 3; ++i)
            chain->save_to_chain(store.put("c" + std::to_string(i)).cid, store);
    }

    SECTION("edited data_hash fails link verification at that index") {
        auto content = read_file(journal);
        auto lines = std::vector<std::string>{};
        std::size_t start = 0;
        while (start < content.size()) {
            auto nl = content.find('\n', start);
            lines.push_back(content.substr(start, nl - start));
            start = nl + 1;
        }
        REQUIRE(lines.size() == 4);
        auto pos = lines[2].find(sha256_hex("c1"));
        REQUIRE(pos != std::string::npos);
        lines[2].replace(pos, 64, sha256_hex("forged"));
        std::string rewritten;
        for (const auto& l : lines) rewritten += l + "\n";
        write_file(journal, rewritten);

        try {
            Chain::load(journal);
            FAIL("expected link-invalid");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::link_invalid);
            CHECK(std::string(e.what()).find("index 2") != std::string::npos);
        }
    }

    SECTION("mid-block truncation is a load error, not a shorter chain") {
        auto content = read_file(journal);
        write_file(journal, content.substr(0, content.size() - 25));
        try {
            Chain::load(journal);
            FAIL("expected journal-corrupt");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::journal_corrupt);
        }
    }

    SECTION("non-genesis first block is rejected") {
        auto content = read_file(journal);
        auto first_nl = content.find('\n');
        write_file(journal, content.substr(first_nl + 1));
        CHECK_THROWS_AS(Chain::load(journal), Error);
    }
}

TEST_CASE("last_block on a fresh chain is genesis", "[lightchain]") {
    TempDir tmp;
    auto chain = Chain::create(tmp / "chain.ndjson");
    CHECK(chain->last_block() == lightchain::genesis());
    CHECK(chain->size() == 1);
    CHECK(chain->verify().ok);
}

TEST_CASE("create refuses an existing journal", "[lightchain]") {
    TempDir tmp;
    auto journal = tmp / "chain.ndjson";
    { Chain::create(journal); }
    CHECK_THROWS_AS(Chain::create(journal), Error);
    CHECK_NOTHROW(Chain::load(journal));
}

TEST_CASE("audit rows carry the table-12 fields", "[lightchain]") {
    ChainFixture fx;
    fx.add_content(std::string(152, 'z'));

    auto rows = lightchain::audit_chain(*fx.chain, fx.store);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].block == 1);
    CHECK(rows[0].cid == fx.cids[0].text);
    CHECK(rows[0].size_bytes == 152);
    CHECK(rows[0].stored_hash == rows[0].fetched_hash);
    CHECK(rows[0].verdict == Verdict::verified);
    CHECK(rows[0].fetch_time_s >= 0.0);
}
