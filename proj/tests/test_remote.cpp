#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ipfspipe/cas.hpp"
#include "ipfspipe/ipfs_http.hpp"
#include "fake_daemon.hpp"
#include "support.hpp"

using namespace ipfspipe;
using cas::RemoteConfig;
using cas::RemoteStore;

TEST_CASE("remote add/cat/pin/stat round trip over the HTTP API", "[remote]") {
    FakeDaemon daemon;
    RemoteStore store(daemon.config());
    REQUIRE(store.daemon_reachable());

    auto put = store.put("remote payload");
    CHECK(put.cid.backend_kind == cas::BackendKind::remote);
    CHECK_FALSE(put.cid.text.empty());
    CHECK(put.metrics.size_bytes == 14);

    CHECK(store.get(put.cid) == "remote payload");

    auto st = store.pin(put.cid);
    CHECK(st.pinned);
    CHECK(st.size_bytes == 14);
    CHECK(daemon.pinned(put.cid.text));

    auto st2 = store.stat(put.cid);
    CHECK(st2.pinned);
    CHECK(st2.size_bytes == 14);
}

TEST_CASE("remote put_file uploads file bytes via multipart add", "[remote]") {
    FakeDaemon daemon;
    RemoteStore store(daemon.config());

    TempDir tmp;
    std::mt19937_64 rng(77);
    auto content = random_bytes(rng, 70000);
    write_file(tmp / "blob.bin", content);

    auto put = store.put_file(tmp / "blob.bin");
    CHECK(put.metrics.size_bytes == content.size());
    CHECK(store.get(put.cid) == content);
}

TEST_CASE("gateway reads fetch through the gateway port", "[remote]") {
    FakeDaemon daemon;
    RemoteStore api_store(daemon.config(false));
    RemoteStore gw_store(daemon.config(true));

    auto put = api_store.put("served by the gateway");
    double elapsed = 0.0;
    CHECK(gw_store.get(put.cid, &elapsed) == "served by the gateway");
    CHECK(elapsed >= 0.0);

    cas::Cid missing{cas::local_cid_text("not there"), cas::BackendKind::remote};
    try {
        gw_store.get(missing);
        FAIL("expected not-found");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::not_found);
    }
}

TEST_CASE("unknown CID maps to not-found", "[remote]") {
    FakeDaemon daemon;
    RemoteStore store(daemon.config());
    cas::Cid missing{cas::local_cid_text("never added"), cas::BackendKind::remote};

    CHECK_THROWS_AS(store.get(missing), Error);
    try {
        store.pin(missing);
        FAIL("expected not-found");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::not_found);
    }
}

TEST_CASE("a dead daemon is a retriable backend-unreachable error", "[remote]") {
    RemoteConfig cfg;
    cfg.host = "127.0.0.1";
    cfg.api_port = 1; // nothing listens here
    RemoteStore store(cfg);

    CHECK_FALSE(store.daemon_reachable());
    try {
        store.put("no daemon");
        FAIL("expected backend-unreachable");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::backend_unreachable);
        CHECK(e.retriable());
    }
}
