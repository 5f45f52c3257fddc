#include <doctest.h>

#include <random>

#include "otx/wh.hpp"

using namespace otx;

namespace {

// Independent reference: codeword bit p of message x is the GF(2) inner
// product of the binary expansions, computed with an explicit bit loop.
int naive_wh_bit(uint32_t x, uint32_t p, uint32_t logk) {
    int acc = 0;
    for (uint32_t t = 0; t < logk; ++t)
        acc ^= int((x >> t) & 1) & int((p >> t) & 1);
    return acc;
}

size_t hamming(const BitVector& a, const BitVector& b) {
    size_t d = 0;
    for (size_t i = 0; i < a.size(); ++i) d += a.get(i) != b.get(i);
    return d;
}

}  // namespace

TEST_CASE("wh_encode enumerated examples") {
    CHECK(wh_encode(BitVector::from_string("00"), 4) == BitVector::from_string("0000"));
    CHECK(wh_encode(BitVector::from_string("10"), 4) == BitVector::from_string("0011"));
    CHECK(wh_encode(BitVector::from_string("01"), 4) == BitVector::from_string("0101"));
    CHECK_THROWS_AS(wh_encode(BitVector::from_string("01"), 6), ParamError);
    CHECK_THROWS_AS(wh_encode(BitVector::from_string("011"), 4), DimensionError);
}

TEST_CASE("wh_encode matches the naive inner-product reference") {
    for (uint32_t kappa : {2u, 4u, 8u, 16u, 32u}) {
        uint32_t logk = log2_exact(kappa);
        for (uint32_t x = 0; x < kappa; ++x) {
            BitVector cw = wh_encode_index(x, kappa);
            for (uint32_t p = 0; p < kappa; ++p)
                CHECK(int(cw.get(p)) == naive_wh_bit(x, p, logk));
        }
    }
}

TEST_CASE("build_code: codeword count, zero codeword, exact distance") {
    SUBCASE("kappa=2") {
        WHCode code(2);
        CHECK(code.codeword(1) == BitVector::from_string("00"));
        CHECK(code.codeword(2) == BitVector::from_string("01"));
    }
    for (uint32_t kappa : {4u, 8u, 16u, 32u}) {
        WHCode code(kappa);
        CHECK(code.codeword(1) == BitVector(kappa));
        // every pair sits at distance exactly kappa/2; this is what makes the
        // unchosen pads depend on kappa/2 unknown bits of s
        for (uint32_t a = 1; a <= kappa; ++a)
            for (uint32_t b = a + 1; b <= kappa; ++b) {
                CHECK(hamming(code.codeword(a), code.codeword(b)) == kappa / 2);
                CHECK(hdi(code.codeword(a), code.codeword(b)).size() == kappa / 2);
            }
    }
    CHECK_THROWS_AS(WHCode(12), ParamError);
}

TEST_CASE("hdi") {
    auto v = [](const char* s) { return BitVector::from_string(s); };
    CHECK(hdi(v("1010"), v("1010")) == IndexSet{});
    CHECK(hdi(v("1010"), v("0010")) == IndexSet({1}));
    CHECK(hdi(v("0000"), v("1111")) == IndexSet({1, 2, 3, 4}));
    CHECK_THROWS_AS(hdi(v("10"), v("100")), DimensionError);
}

TEST_CASE("prune") {
    auto v = [](const char* s) { return BitVector::from_string(s); };
    CHECK(prune(v("1011"), IndexSet{}) == v("1011"));
    CHECK(prune(v("1011"), IndexSet({1})) == v("011"));
    CHECK(prune(v("1011"), IndexSet({2, 4})) == v("11"));
    CHECK_THROWS_AS(prune(v("1011"), IndexSet({5})), ParamError);
}

TEST_CASE("is_codeword") {
    WHCode code(4);
    CHECK(is_codeword(BitVector(4), code) == uint16_t(1));
    CHECK(is_codeword(wh_encode(BitVector::from_string("10"), 4), code) == uint16_t(3));
    CHECK_FALSE(is_codeword(BitVector::from_string("0001"), code).has_value());
    CHECK_THROWS_AS(is_codeword(BitVector(5), code), DimensionError);
}

TEST_CASE("decode_pruned") {
    WHCode code(4);
    SUBCASE("round trip at kappa=4") {
        IndexSet T({1});
        PrunedCode pc(code, T);
        CHECK(decode_pruned(prune(code.codeword(3), T), pc) == uint16_t(3));
    }
    SUBCASE("empty pruning reduces to is_codeword") {
        PrunedCode pc(code, IndexSet{});
        for (uint32_t j = 1; j <= 4; ++j)
            CHECK(decode_pruned(code.codeword(j), pc) == uint16_t(j));
        CHECK_FALSE(decode_pruned(BitVector::from_string("0001"), pc).has_value());
    }
    SUBCASE("non-matching vectors decode to nothing, exhaustively at kappa=8") {
        WHCode c8(8);
        IndexSet T({3});
        PrunedCode pc(c8, T);
        for (uint32_t bits = 0; bits < 128; ++bits) {
            BitVector v(7);
            for (int k = 0; k < 7; ++k)
                if ((bits >> k) & 1) v.set(k, true);
            // independent reference: scan all pruned codewords for a match
            std::optional<uint16_t> want;
            for (uint32_t j = 1; j <= 8; ++j)
                if (prune(c8.codeword(j), T) == v) want = uint16_t(j);
            CHECK(decode_pruned(v, pc) == want);
        }
    }
    SUBCASE("oversized pruning set is refused") {
        WHCode c8(8);
        PrunedCode pc(c8, IndexSet({1, 2, 3, 4}));
        CHECK_THROWS_AS(decode_pruned(BitVector(4), pc), ParamError);
    }
}

TEST_CASE("linearity: encode is additive, exhaustive at small kappa") {
    for (uint32_t kappa : {4u, 8u, 16u}) {
        for (uint32_t x = 0; x < kappa; ++x)
            for (uint32_t y = 0; y < kappa; ++y)
                CHECK(wh_encode_index(x ^ y, kappa) ==
                      xor_vec(wh_encode_index(x, kappa), wh_encode_index(y, kappa)));
    }
}

TEST_CASE("closure under xor at kappa=8") {
    WHCode code(8);
    std::mt19937_64 g(11);
    SUBCASE("xor of codeword multisets is a codeword") {
        for (int t = 0; t < 200; ++t) {
            BitVector acc(8);
            for (int k = 0; k < 5; ++k) acc.xor_with(code.codeword(uint32_t(g() % 8 + 1)));
            CHECK(is_codeword(acc, code).has_value());
        }
    }
    SUBCASE("codeword xor non-codeword is a non-codeword") {
        for (uint32_t bits = 1; bits < 256; ++bits) {
            BitVector v(8);
            for (int k = 0; k < 8; ++k)
                if ((bits >> k) & 1) v.set(k, true);
            if (is_codeword(v, code)) continue;
            for (uint32_t j = 1; j <= 8; ++j)
                CHECK_FALSE(is_codeword(xor_vec(v, code.codeword(j)), code).has_value());
        }
    }
}

TEST_CASE("pruned code keeps distance kappa/2 - |I|, random prunings") {
    std::mt19937_64 g(12);
    for (uint32_t kappa : {4u, 8u, 16u}) {
        WHCode code(kappa);
        for (int t = 0; t < 40; ++t) {
            size_t isz = g() % (kappa / 2);
            std::vector<uint32_t> pos;
            while (pos.size() < isz) pos.push_back(uint32_t(g() % kappa + 1));
            IndexSet I(pos);
            PrunedCode pc(code, I);
            size_t min_d = kappa + 1;
            for (uint32_t a = 1; a <= kappa; ++a)
                for (uint32_t b = a + 1; b <= kappa; ++b)
                    min_d = std::min(min_d,
                                     hamming(pc.pruned_codeword(a), pc.pruned_codeword(b)));
            CHECK(min_d >= kappa / 2 - I.size());
            CHECK(min_d >= 1);
        }
    }
}

TEST_CASE("decode_pruned round trips for random prunings") {
    std::mt19937_64 g(13);
    for (uint32_t kappa : {8u, 16u, 32u}) {
        WHCode code(kappa);
        for (int t = 0; t < 30; ++t) {
            size_t isz = g() % (kappa / 2);
            std::vector<uint32_t> pos;
            while (pos.size() < isz) pos.push_back(uint32_t(g() % kappa + 1));
            IndexSet T(pos);
            PrunedCode pc(code, T);
            for (uint32_t r = 1; r <= kappa; ++r)
                CHECK(decode_pruned(prune(code.codeword(r), T), pc) == uint16_t(r));
        }
    }
}

TEST_CASE("randomized linearity test") {
    WHCode code(16);
    std::mt19937_64 g(14);
    auto rand_combiner = [&](size_t n) {
        BitVector w(n);
        for (size_t i = 0; i < n; ++i)
            if (g() & 1) w.set(i, true);
        return w;
    };

    SUBCASE("all-codeword sets always accept") {
        std::vector<BitVector> ys;
        for (int k = 0; k < 32; ++k) ys.push_back(code.codeword(uint32_t(g() % 16 + 1)));
        for (int t = 0; t < 500; ++t) CHECK(linearity_test(ys, rand_combiner(ys.size()), code));
    }
    SUBCASE("a planted non-codeword is rejected about half the time") {
        std::vector<BitVector> ys;
        for (int k = 0; k < 31; ++k) ys.push_back(code.codeword(uint32_t(g() % 16 + 1)));
        BitVector bad(16);
        bad.set(2, true);  // weight-1 vectors are never codewords for kappa >= 4
        ys.push_back(bad);
        int rejects = 0;
        const int trials = 2000;
        for (int t = 0; t < trials; ++t)
            rejects += !linearity_test(ys, rand_combiner(ys.size()), code);
        CHECK(rejects >= trials * 45 / 100);
        CHECK(rejects <= trials * 55 / 100);
    }
    SUBCASE("pruned variant behaves the same") {
        IndexSet I({2, 7});
        PrunedCode pc(code, I);
        std::vector<BitVector> ys;
        for (int k = 0; k < 16; ++k)
            ys.push_back(prune(code.codeword(uint32_t(g() % 16 + 1)), I));
        for (int t = 0; t < 200; ++t)
            CHECK(linearity_test_pruned(ys, rand_combiner(ys.size()), pc));
        BitVector bad(14);
        bad.set(0, true);
        ys.push_back(bad);
        int rejects = 0;
        for (int t = 0; t < 2000; ++t)
            rejects += !linearity_test_pruned(ys, rand_combiner(ys.size()), pc);
        CHECK(rejects >= 2000 * 45 / 100);
    }
}
