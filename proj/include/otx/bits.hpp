#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "otx/error.hpp"

namespace otx {

/// Packed bit vector, LSB-first within each byte. Bits at positions >= size()
/// are kept zero in storage so whole-word operations need no special casing.
class BitVector {
  public:
    BitVector() = default;

    explicit BitVector(size_t nbits) : len_(nbits), w_((nbits + 63) / 64, 0) {}

    static BitVector zeros(size_t nbits) { return BitVector(nbits); }

    // "1011" reads left to right as bit 0, bit 1, ...
    static BitVector from_string(const std::string& s) {
        BitVector v(s.size());
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '1')
                v.set(i, true);
            else if (s[i] != '0')
                throw ParamError("BitVector::from_string: expected '0' or '1'");
        }
        return v;
    }

    static BitVector from_bytes(const uint8_t* data, size_t nbits) {
        BitVector v(nbits);
        size_t nbytes = (nbits + 7) / 8;
        for (size_t b = 0; b < nbytes; ++b)
            v.w_[b / 8] |= uint64_t(data[b]) << (8 * (b % 8));
        v.clear_padding();
        return v;
    }

    static BitVector from_bytes(const std::vector<uint8_t>& data, size_t nbits) {
        if (data.size() < (nbits + 7) / 8)
            throw DimensionError("BitVector::from_bytes: buffer too short");
        return from_bytes(data.data(), nbits);
    }

    size_t size() const { return len_; }
    bool empty() const { return len_ == 0; }

    bool get(size_t i) const { return (w_[i / 64] >> (i % 64)) & 1; }

    void set(size_t i, bool v) {
        uint64_t mask = uint64_t(1) << (i % 64);
        if (v)
            w_[i / 64] |= mask;
        else
            w_[i / 64] &= ~mask;
    }

    /// Reads count <= 64 bits starting at bit position pos, LSB-first.
    uint64_t get_bits(size_t pos, size_t count) const {
        uint64_t out = 0;
        size_t wi = pos / 64, off = pos % 64;
        out = w_[wi] >> off;
        if (off + count > 64 && wi + 1 < w_.size())
            out |= w_[wi + 1] << (64 - off);
        if (count < 64) out &= (uint64_t(1) << count) - 1;
        return out;
    }

    /// Writes count <= 64 bits starting at bit position pos.
    void set_bits(size_t pos, size_t count, uint64_t val) {
        if (count < 64) val &= (uint64_t(1) << count) - 1;
        size_t wi = pos / 64, off = pos % 64;
        w_[wi] &= ~(count < 64 ? ((uint64_t(1) << count) - 1) << off
                               : ~uint64_t(0) << off);
        w_[wi] |= val << off;
        if (off + count > 64) {
            size_t hi = off + count - 64;
            w_[wi + 1] &= ~((uint64_t(1) << hi) - 1);
            w_[wi + 1] |= val >> (64 - off);
        }
    }

    size_t byte_size() const { return (len_ + 7) / 8; }

    // Wire layout: ceil(size/8) bytes, LSB-first within each byte.
    std::vector<uint8_t> to_bytes() const {
        std::vector<uint8_t> out(byte_size());
        write_bytes(out.data());
        return out;
    }

    void write_bytes(uint8_t* out) const {
        size_t nbytes = byte_size();
        for (size_t b = 0; b < nbytes; ++b)
            out[b] = uint8_t(w_[b / 8] >> (8 * (b % 8)));
    }

    uint64_t word(size_t i) const { return w_[i]; }
    uint64_t& word(size_t i) { return w_[i]; }
    size_t word_count() const { return w_.size(); }

    void xor_with(const BitVector& o) {
        check_same_length(o);
        for (size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
    }

    void and_with(const BitVector& o) {
        check_same_length(o);
        for (size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    }

    bool operator==(const BitVector& o) const {
        return len_ == o.len_ && w_ == o.w_;
    }
    bool operator!=(const BitVector& o) const { return !(*this == o); }

    std::string to_string() const {
        std::string s(len_, '0');
        for (size_t i = 0; i < len_; ++i)
            if (get(i)) s[i] = '1';
        return s;
    }

    void clear_padding() {
        if (len_ % 64 != 0 && !w_.empty())
            w_.back() &= (uint64_t(1) << (len_ % 64)) - 1;
    }

    void check_same_length(const BitVector& o) const {
        if (len_ != o.len_)
            throw DimensionError("bit vector length mismatch: " +
                                 std::to_string(len_) + " vs " +
                                 std::to_string(o.len_));
    }

  private:
    size_t len_ = 0;
    std::vector<uint64_t> w_;
};

inline BitVector xor_vec(const BitVector& a, const BitVector& b) {
    BitVector r = a;
    r.xor_with(b);
    return r;
}

inline BitVector and_vec(const BitVector& a, const BitVector& b) {
    BitVector r = a;
    r.and_with(b);
    return r;
}

inline BitVector scalar_and(bool c, const BitVector& a) {
    return c ? a : BitVector::zeros(a.size());
}

inline int parity(const BitVector& a) {
    uint64_t acc = 0;
    for (size_t i = 0; i < a.word_count(); ++i) acc ^= a.word(i);
    return std::popcount(acc) & 1;
}

inline int inner_product(const BitVector& a, const BitVector& b) {
    a.check_same_length(b);
    uint64_t acc = 0;
    for (size_t i = 0; i < a.word_count(); ++i) acc ^= a.word(i) & b.word(i);
    return std::popcount(acc) & 1;
}

namespace detail {

// 8x8 bit-matrix transpose; byte r of x is row r, bit c within it column c.
inline uint64_t transpose8x8(uint64_t x) {
    uint64_t t;
    t = (x ^ (x >> 7)) & 0x00AA00AA00AA00AAull;
    x = x ^ t ^ (t << 7);
    t = (x ^ (x >> 14)) & 0x0000CCCC0000CCCCull;
    x = x ^ t ^ (t << 14);
    t = (x ^ (x >> 28)) & 0x00000000F0F0F0F0ull;
    x = x ^ t ^ (t << 28);
    return x;
}

}  // namespace detail

/// Packed binary matrix stored column-major: each column is a BitVector of
/// `rows` bits padded to whole words. Column-major matches the protocol's
/// data flow, where matrices are built one PRG-filled column at a time.
class BitMatrix {
  public:
    BitMatrix() = default;

    BitMatrix(size_t rows, size_t cols)
        : rows_(rows), cols_(cols), cw_((rows + 63) / 64), w_(cw_ * cols, 0) {}

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }

    bool get(size_t r, size_t c) const {
        return (w_[c * cw_ + r / 64] >> (r % 64)) & 1;
    }

    void set(size_t r, size_t c, bool v) {
        uint64_t mask = uint64_t(1) << (r % 64);
        if (v)
            w_[c * cw_ + r / 64] |= mask;
        else
            w_[c * cw_ + r / 64] &= ~mask;
    }

    BitVector col(size_t j) const {
        BitVector v(rows_);
        for (size_t i = 0; i < cw_; ++i) v.word(i) = w_[j * cw_ + i];
        return v;
    }

    void set_col(size_t j, const BitVector& v) {
        if (v.size() != rows_)
            throw DimensionError("set_col: column length mismatch");
        for (size_t i = 0; i < cw_; ++i) w_[j * cw_ + i] = v.word(i);
    }

    void xor_col(size_t j, const BitVector& v) {
        if (v.size() != rows_)
            throw DimensionError("xor_col: column length mismatch");
        for (size_t i = 0; i < cw_; ++i) w_[j * cw_ + i] ^= v.word(i);
    }

    BitVector row(size_t i) const {
        BitVector v(cols_);
        for (size_t j = 0; j < cols_; ++j) v.set(j, get(i, j));
        return v;
    }

    void set_row(size_t i, const BitVector& v) {
        if (v.size() != cols_)
            throw DimensionError("set_row: row length mismatch");
        for (size_t j = 0; j < cols_; ++j) set(i, j, v.get(j));
    }

    const uint64_t* col_words(size_t j) const { return &w_[j * cw_]; }
    size_t col_word_count() const { return cw_; }

    /// Copies column j into out as ceil(rows/8) LSB-first bytes.
    void col_bytes_into(size_t j, uint8_t* out) const {
        size_t cb = (rows_ + 7) / 8;
        for (size_t b = 0; b < cb; ++b)
            out[b] = uint8_t(w_[j * cw_ + b / 8] >> (8 * (b % 8)));
    }

    bool operator==(const BitMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && w_ == o.w_;
    }

    /// Wire format: cols x ceil(rows/8) bytes, column-major, each column
    /// LSB-first and zero-padded to a whole byte.
    std::vector<uint8_t> serialize() const {
        size_t cb = (rows_ + 7) / 8;
        std::vector<uint8_t> out(cb * cols_);
        for (size_t j = 0; j < cols_; ++j)
            for (size_t b = 0; b < cb; ++b)
                out[j * cb + b] = uint8_t(w_[j * cw_ + b / 8] >> (8 * (b % 8)));
        return out;
    }

    static BitMatrix deserialize(size_t rows, size_t cols,
                                 const std::vector<uint8_t>& data) {
        size_t cb = (rows + 7) / 8;
        if (data.size() != cb * cols)
            throw DimensionError("BitMatrix::deserialize: size mismatch");
        BitMatrix m(rows, cols);
        for (size_t j = 0; j < cols; ++j)
            for (size_t b = 0; b < cb; ++b)
                m.w_[j * m.cw_ + b / 8] |=
                    uint64_t(data[j * cb + b]) << (8 * (b % 8));
        m.clear_padding();
        return m;
    }

    void clear_padding() {
        if (rows_ % 64 == 0) return;
        uint64_t mask = (uint64_t(1) << (rows_ % 64)) - 1;
        for (size_t j = 0; j < cols_; ++j) w_[j * cw_ + cw_ - 1] &= mask;
    }

  private:
    friend BitMatrix transpose(const BitMatrix&);

    uint8_t col_byte(size_t j, size_t b) const {
        return uint8_t(w_[j * cw_ + b / 8] >> (8 * (b % 8)));
    }

    void or_col_byte(size_t j, size_t b, uint8_t v) {
        w_[j * cw_ + b / 8] |= uint64_t(v) << (8 * (b % 8));
    }

    size_t rows_ = 0, cols_ = 0;
    size_t cw_ = 0;  // words per column
    std::vector<uint64_t> w_;
};

/// XOR of the rows of M selected by w (w.size() == M.rows()). Computed
/// column-wise: bit j of the result is the inner product of column j with w,
/// so no row materialization is needed.
inline BitVector combine_rows(const BitMatrix& m, const BitVector& w) {
    if (w.size() != m.rows())
        throw DimensionError("combine_rows: combiner length != row count");
    BitVector out(m.cols());
    size_t cw = m.col_word_count();
    for (size_t j = 0; j < m.cols(); ++j) {
        const uint64_t* c = m.col_words(j);
        uint64_t acc = 0;
        for (size_t i = 0; i < cw; ++i) acc ^= c[i] & w.word(i);
        if (std::popcount(acc) & 1) out.set(j, true);
    }
    return out;
}

/// Blockwise transpose over 8x8 bit tiles.
inline BitMatrix transpose(const BitMatrix& m) {
    BitMatrix out(m.cols(), m.rows());
    size_t rb = (m.rows() + 7) / 8;  // byte-rows of input
    size_t cb = (m.cols() + 7) / 8;  // byte-groups of input columns
    for (size_t jb = 0; jb < cb; ++jb) {
        size_t jmax = std::min<size_t>(8, m.cols() - jb * 8);
        for (size_t ib = 0; ib < rb; ++ib) {
            uint64_t x = 0;
            for (size_t k = 0; k < jmax; ++k)
                x |= uint64_t(m.col_byte(jb * 8 + k, ib)) << (8 * k);
            if (x == 0) continue;
            x = detail::transpose8x8(x);
            size_t imax = std::min<size_t>(8, m.rows() - ib * 8);
            for (size_t t = 0; t < imax; ++t) {
                uint8_t byte = uint8_t(x >> (8 * t));
                if (byte) out.or_col_byte(ib * 8 + t, jb, byte);
            }
        }
    }
    return out;
}

/// combine_rows for several combiners at once, reading the transposed matrix
/// (column i of mt is row i of the original). One pass over mt: every
/// selected row is XORed into the accumulator of each combiner that picks it.
inline std::vector<BitVector> combine_rows_transposed(const BitMatrix& mt,
                                                      const std::vector<BitVector>& ws) {
    for (auto& w : ws)
        if (w.size() != mt.cols())
            throw DimensionError("combine_rows: combiner length != row count");
    size_t mu = ws.size();
    size_t cw = mt.col_word_count();
    std::vector<BitVector> out(mu, BitVector(mt.rows()));
    if (mu == 0) return out;

    // masks[i] = bit l set iff combiner l selects row i
    BitMatrix wm(mt.cols(), mu);
    for (size_t l = 0; l < mu; ++l) wm.set_col(l, ws[l]);
    BitMatrix wt = transpose(wm);

    std::vector<uint64_t> acc(mu * cw, 0);
    size_t mw = wt.col_word_count();
    for (size_t i = 0; i < mt.cols(); ++i) {
        const uint64_t* col = mt.col_words(i);
        const uint64_t* mask = wt.col_words(i);
        for (size_t w = 0; w < mw; ++w) {
            uint64_t bits = mask[w];
            while (bits) {
                size_t l = w * 64 + std::countr_zero(bits);
                bits &= bits - 1;
                uint64_t* a = &acc[l * cw];
                for (size_t k = 0; k < cw; ++k) a[k] ^= col[k];
            }
        }
    }
    for (size_t l = 0; l < mu; ++l)
        for (size_t k = 0; k < cw; ++k) out[l].word(k) = acc[l * cw + k];
    return out;
}

}  // namespace otx
