#include <doctest.h>

#include <random>

#include "otx/bits.hpp"

using namespace otx;

namespace {

BitVector random_vec(std::mt19937_64& g, size_t len) {
    BitVector v(len);
    for (size_t i = 0; i < len; ++i)
        if (g() & 1) v.set(i, true);
    return v;
}

BitMatrix random_mat(std::mt19937_64& g, size_t rows, size_t cols) {
    BitMatrix m(rows, cols);
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j)
            if (g() & 1) m.set(i, j, true);
    return m;
}

}  // namespace

TEST_CASE("xor_vec truth table") {
    auto v = [](const char* s) { return BitVector::from_string(s); };
    CHECK(xor_vec(v("1010"), v("0000")) == v("1010"));
    CHECK(xor_vec(v("1010"), v("1010")) == v("0000"));
    CHECK(xor_vec(v("1100"), v("1010")) == v("0110"));
    CHECK_THROWS_AS(xor_vec(v("101"), v("10")), DimensionError);
}

TEST_CASE("and_vec truth table") {
    auto v = [](const char* s) { return BitVector::from_string(s); };
    CHECK(and_vec(v("1111"), v("1010")) == v("1010"));
    CHECK(and_vec(v("0000"), v("1010")) == v("0000"));
    CHECK(and_vec(v("1100"), v("1010")) == v("1000"));
    CHECK_THROWS_AS(and_vec(v("1"), v("10")), DimensionError);
}

TEST_CASE("scalar_and") {
    auto v = [](const char* s) { return BitVector::from_string(s); };
    CHECK(scalar_and(false, v("1011")) == v("0000"));
    CHECK(scalar_and(true, v("1011")) == v("1011"));
    CHECK(scalar_and(true, v("0000")) == v("0000"));
}

TEST_CASE("inner_product") {
    auto v = [](const char* s) { return BitVector::from_string(s); };
    CHECK(inner_product(v("11"), v("11")) == 0);
    CHECK(inner_product(v("10"), v("11")) == 1);
    CHECK(inner_product(v("00"), v("10")) == 0);
    CHECK(inner_product(v("00"), v("01")) == 0);
    CHECK_THROWS_AS(inner_product(v("1"), v("10")), DimensionError);
}

TEST_CASE("parity") {
    auto v = [](const char* s) { return BitVector::from_string(s); };
    CHECK(parity(v("0000")) == 0);
    CHECK(parity(v("0001")) == 1);
    CHECK(parity(v("1101")) == 1);
}

TEST_CASE("xor algebra, random lengths") {
    std::mt19937_64 g(1);
    for (int t = 0; t < 200; ++t) {
        size_t len = 1 + g() % 1024;
        BitVector a = random_vec(g, len), b = random_vec(g, len), c = random_vec(g, len);
        CHECK(xor_vec(a, b) == xor_vec(b, a));
        CHECK(xor_vec(xor_vec(a, b), c) == xor_vec(a, xor_vec(b, c)));
        CHECK(xor_vec(xor_vec(a, b), b) == a);
        CHECK(parity(xor_vec(a, b)) == (parity(a) ^ parity(b)));
        CHECK(inner_product(a, b) == parity(and_vec(a, b)));
    }
}

TEST_CASE("get_bits / set_bits round trips") {
    std::mt19937_64 g(2);
    BitVector v(777);
    for (int t = 0; t < 2000; ++t) {
        size_t count = 1 + g() % 64;
        size_t pos = g() % (777 - count);
        uint64_t val = g();
        if (count < 64) val &= (uint64_t(1) << count) - 1;
        v.set_bits(pos, count, val);
        CHECK(v.get_bits(pos, count) == val);
    }
    // padding must stay clear through byte serialization
    auto bytes = v.to_bytes();
    CHECK(BitVector::from_bytes(bytes, 777) == v);
}

TEST_CASE("byte serialization is LSB-first") {
    BitVector v(9);
    v.set(0, true);
    v.set(7, true);
    v.set(8, true);
    auto b = v.to_bytes();
    REQUIRE(b.size() == 2);
    CHECK(b[0] == 0x81);
    CHECK(b[1] == 0x01);
}

TEST_CASE("combine_rows selection and linearity") {
    std::mt19937_64 g(3);
    BitMatrix m = random_mat(g, 17, 33);

    SUBCASE("unit combiner selects one row") {
        for (size_t k = 0; k < m.rows(); ++k) {
            BitVector w(m.rows());
            w.set(k, true);
            CHECK(combine_rows(m, w) == m.row(k));
        }
    }
    SUBCASE("zero combiner gives the zero vector") {
        CHECK(combine_rows(m, BitVector(m.rows())) == BitVector(m.cols()));
    }
    SUBCASE("2x2 hand example") {
        BitMatrix t(2, 2);
        t.set(0, 0, true);
        t.set(1, 1, true);
        CHECK(combine_rows(t, BitVector::from_string("11")) ==
              BitVector::from_string("11"));
    }
    SUBCASE("linear in the combiner") {
        for (int t = 0; t < 50; ++t) {
            BitVector w1 = random_vec(g, m.rows()), w2 = random_vec(g, m.rows());
            CHECK(combine_rows(m, xor_vec(w1, w2)) ==
                  xor_vec(combine_rows(m, w1), combine_rows(m, w2)));
        }
    }
    SUBCASE("dimension check") {
        CHECK_THROWS_AS(combine_rows(m, BitVector(m.rows() + 1)), DimensionError);
    }
    SUBCASE("batched transposed form agrees with the single-combiner form") {
        BitMatrix mt = transpose(m);
        std::vector<BitVector> ws;
        for (int t = 0; t < 9; ++t) ws.push_back(random_vec(g, m.rows()));
        auto multi = combine_rows_transposed(mt, ws);
        REQUIRE(multi.size() == ws.size());
        for (size_t l = 0; l < ws.size(); ++l) CHECK(multi[l] == combine_rows(m, ws[l]));
    }
}

TEST_CASE("transpose") {
    std::mt19937_64 g(4);

    SUBCASE("identity is a fixed point") {
        BitMatrix id(8, 8);
        for (int i = 0; i < 8; ++i) id.set(i, i, true);
        CHECK(transpose(id) == id);
    }
    SUBCASE("row vector becomes column vector") {
        BitMatrix r(1, 5);
        r.set(0, 3, true);
        BitMatrix c = transpose(r);
        CHECK(c.rows() == 5);
        CHECK(c.cols() == 1);
        CHECK(c.get(3, 0));
    }
    SUBCASE("entries move to the mirrored position") {
        for (auto [rows, cols] : {std::pair<size_t, size_t>{64, 256},
                                  {13, 7},
                                  {65, 9},
                                  {256, 100}}) {
            BitMatrix m = random_mat(g, rows, cols);
            BitMatrix t = transpose(m);
            REQUIRE(t.rows() == cols);
            REQUIRE(t.cols() == rows);
            for (size_t i = 0; i < rows; ++i)
                for (size_t j = 0; j < cols; ++j)
                    CHECK(t.get(j, i) == m.get(i, j));
        }
    }
    SUBCASE("involution on a 64x256 matrix") {
        BitMatrix m = random_mat(g, 64, 256);
        CHECK(transpose(transpose(m)) == m);
    }
}

TEST_CASE("row and column accessors agree after mutation") {
    std::mt19937_64 g(5);
    BitMatrix m(37, 21);
    for (int t = 0; t < 300; ++t) {
        size_t i = g() % 37, j = g() % 21;
        m.set(i, j, g() & 1);
        CHECK(m.row(i).get(j) == m.col(j).get(i));
    }
}

TEST_CASE("matrix wire format: column-major packed columns") {
    BitMatrix m(9, 2);
    m.set(0, 0, true);
    m.set(8, 0, true);
    m.set(1, 1, true);
    auto bytes = m.serialize();
    REQUIRE(bytes.size() == 4);  // 2 columns x ceil(9/8)
    CHECK(bytes[0] == 0x01);
    CHECK(bytes[1] == 0x01);
    CHECK(bytes[2] == 0x02);
    CHECK(bytes[3] == 0x00);
    CHECK(BitMatrix::deserialize(9, 2, bytes) == m);
}
