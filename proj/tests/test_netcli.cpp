#include <doctest.h>

#include <fstream>
#include <set>
#include <thread>

#include "harness.hpp"
#include "otx/protocol.hpp"
#include "otx/stats.hpp"

using namespace otx;
using harness::make_params;
using harness::run_loopback;

namespace {

void collect_paths(const nlohmann::json& j, const std::string& prefix,
                   std::set<std::string>& out) {
    if (!j.is_object()) {
        out.insert(prefix);
        return;
    }
    for (auto it = j.begin(); it != j.end(); ++it)
        collect_paths(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
}

}  // namespace

TEST_CASE("predict_bytes reproduces the closed-form totals") {
    SUBCASE("m=1.25e6, n=16, ell=4: the 47.69 MB workload") {
        auto sh = make_params(256, 0, 1250000, 16, 4, Mode::semi_honest);
        auto c = predict_bytes(sh);
        CHECK(c.matrix_d == 40000000);
        CHECK(c.masked == 10000000);
        CHECK(extension_bytes(c) == 50000000);  // 47.68 MiB
        // 20 batches of seed OTs, 3 messages per batch plus two hellos
        CHECK(c.base_ot == 20 * 16384);
        CHECK(c.framing == 5 * (2 + 20 * 3) + 2 * kHelloPayloadBytes);

        auto ac = make_params(256, 96, 1250000, 16, 4, Mode::active);
        auto a = predict_bytes(ac);
        CHECK(a.matrix_d == 40000000 + 20 * 3072);  // mu*kappa bits per batch
        CHECK(a.checks == 20 * 96 * 3);
        CHECK(a.coin_toss == 20 * 64);
        CHECK(a.masked == 10000000);
    }
    SUBCASE("m=1.25e5: the 4.77 MB workload") {
        auto sh = make_params(256, 0, 125000, 16, 4, Mode::semi_honest);
        CHECK(extension_bytes(predict_bytes(sh)) == 5000000);
        auto ac = make_params(256, 96, 125000, 16, 4, Mode::active);
        auto a = predict_bytes(ac);
        CHECK(extension_bytes(a) == 5000000 + 2 * (3072 + 288 + 64));
        double mib = double(extension_bytes(a)) / (1 << 20);
        CHECK(mib > 4.77 * 0.98);
        CHECK(mib < 4.77 * 1.02);
    }
    SUBCASE("degenerate sessions are refused") {
        auto p = make_params(256, 96, 1, 16, 4, Mode::active);
        p.m = 0;
        CHECK_THROWS_AS(predict_bytes(p), ParamError);
    }
}

TEST_CASE("measured bytes equal predicted bytes exactly on loopback") {
    for (Mode mode : {Mode::active, Mode::semi_honest}) {
        auto p = make_params(16, 5, 100, 4, 3, mode, 32);
        auto xs = derive_inputs(120, p.m, p.n, p.ell);
        auto ch = derive_choices(121, p.m, p.n);
        auto res = run_loopback(p, xs, ch, 122);
        auto pred = predict_bytes(p);
        for (const ByteCounters* got : {&res.sender.stats.bytes, &res.receiver.stats.bytes}) {
            CHECK(got->base_ot == pred.base_ot);
            CHECK(got->matrix_d == pred.matrix_d);
            CHECK(got->coin_toss == pred.coin_toss);
            CHECK(got->checks == pred.checks);
            CHECK(got->masked == pred.masked);
            CHECK(got->framing == pred.framing);
            CHECK(got->total() == pred.total());
        }
        auto rep = measure_vs_predict(res.sender.stats.bytes, pred);
        CHECK(rep.max_extension_rel_error == 0.0);
    }
}

TEST_CASE("counter total always equals the category sum") {
    auto p = make_params(8, 2, 17, 4, 5, Mode::active, 8);
    auto res = run_loopback(p, derive_inputs(123, 17, 4, 5), derive_choices(124, 17, 4), 125);
    const auto& b = res.receiver.stats.bytes;
    CHECK(b.total() ==
          b.base_ot + b.matrix_d + b.coin_toss + b.checks + b.masked + b.framing);
}

TEST_CASE("stats JSON schema is stable") {
    auto p = make_params(8, 2, 9, 4, 4, Mode::active);
    auto res = run_loopback(p, derive_inputs(126, 9, 4, 4), derive_choices(127, 9, 4), 128);
    std::set<std::string> paths;
    collect_paths(res.receiver.stats.to_json(), "", paths);

    std::ifstream golden(std::string(OTX_TEST_DATA_DIR) + "/stats_schema.txt");
    REQUIRE(golden.good());
    std::set<std::string> want;
    std::string line;
    while (std::getline(golden, line))
        if (!line.empty()) want.insert(line);
    CHECK(paths == want);
}

TEST_CASE("measure_vs_predict flags deviations") {
    auto p = make_params(16, 3, 50, 4, 4, Mode::active);
    auto pred = predict_bytes(p);
    ByteCounters off = pred;
    off.masked += pred.masked / 10;
    auto rep = measure_vs_predict(off, pred);
    CHECK(rep.max_extension_rel_error > 0.05);
    for (auto& c : rep.categories)
        if (c.name == "masked") CHECK(c.rel_error > 0.05);
}

TEST_CASE("sessions run over a real TCP socket") {
    auto p = make_params(16, 4, 40, 4, 8, Mode::active, 16);
    auto xs = derive_inputs(130, p.m, p.n, p.ell);
    auto ch = derive_choices(131, p.m, p.n);
    IdealDealerBaseOt base_s, base_r;
    Rng srng(132, "tcp-sender"), rrng(132, "tcp-receiver");

    SessionResult sres;
    std::exception_ptr err;
    std::thread listener([&] {
        try {
            Channel chan(TcpStream::listen("127.0.0.1", 42871));
            sres = run_sender_session(chan, p, xs, srng, base_s);
        } catch (...) {
            err = std::current_exception();
        }
    });
    Channel chan(TcpStream::connect("127.0.0.1", 42871));
    auto rres = run_receiver_session(chan, p, ch, rrng, base_r);
    listener.join();
    if (err) std::rethrow_exception(err);

    CHECK_FALSE(rres.aborted);
    for (uint64_t i = 0; i < p.m; ++i)
        CHECK(rres.received.get_small(i) == xs.get(i, ch[i] - 1));
    CHECK(rres.stats.bytes.total() == predict_bytes(p).total());
}
