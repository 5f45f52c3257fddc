#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "otx/bits.hpp"
#include "otx/error.hpp"

namespace otx {

inline bool is_power_of_two(uint64_t x) { return x != 0 && std::has_single_bit(x); }

inline uint32_t log2_exact(uint32_t x) {
    if (!is_power_of_two(x)) throw ParamError("expected a power of two");
    return std::countr_zero(x);
}

/// Sorted, deduplicated set of 1-based positions in [1, kappa].
class IndexSet {
  public:
    IndexSet() = default;

    explicit IndexSet(std::vector<uint32_t> positions) : idx_(std::move(positions)) {
        std::sort(idx_.begin(), idx_.end());
        idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
        if (!idx_.empty() && idx_.front() == 0)
            throw ParamError("IndexSet positions are 1-based");
    }

    size_t size() const { return idx_.size(); }
    bool empty() const { return idx_.empty(); }

    bool contains(uint32_t pos) const {
        return std::binary_search(idx_.begin(), idx_.end(), pos);
    }

    void unite(const IndexSet& o) {
        std::vector<uint32_t> merged;
        merged.reserve(idx_.size() + o.idx_.size());
        std::merge(idx_.begin(), idx_.end(), o.idx_.begin(), o.idx_.end(),
                   std::back_inserter(merged));
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        idx_ = std::move(merged);
    }

    const std::vector<uint32_t>& positions() const { return idx_; }
    auto begin() const { return idx_.begin(); }
    auto end() const { return idx_.end(); }

    bool operator==(const IndexSet& o) const { return idx_ == o.idx_; }

  private:
    std::vector<uint32_t> idx_;
};

/// Positions (1-based) where two equal-length vectors differ.
inline IndexSet hdi(const BitVector& u, const BitVector& v) {
    u.check_same_length(v);
    std::vector<uint32_t> pos;
    for (size_t w = 0; w < u.word_count(); ++w) {
        uint64_t d = u.word(w) ^ v.word(w);
        while (d) {
            pos.push_back(uint32_t(w * 64 + std::countr_zero(d)) + 1);
            d &= d - 1;
        }
    }
    return IndexSet(std::move(pos));
}

/// v with the positions listed in I deleted, order preserved.
inline BitVector prune(const BitVector& v, const IndexSet& I) {
    for (uint32_t p : I)
        if (p > v.size())
            throw ParamError("prune: index " + std::to_string(p) + " out of range");
    BitVector out(v.size() - I.size());
    size_t o = 0;
    auto it = I.begin();
    for (size_t i = 0; i < v.size(); ++i) {
        if (it != I.end() && *it == i + 1) {
            ++it;
            continue;
        }
        if (v.get(i)) out.set(o, true);
        ++o;
    }
    return out;
}

/// Codeword bit p of the message with integer value msg: <msg, p> over GF(2).
inline int wh_bit(uint32_t msg, uint32_t p) {
    return std::popcount(msg & p) & 1;
}

/// Encodes the message with integer value msg (0 <= msg < kappa) into the
/// kappa-bit codeword whose position-p bit is the inner product of the binary
/// representations of msg and p.
inline BitVector wh_encode_index(uint32_t msg, uint32_t kappa) {
    if (!is_power_of_two(kappa)) throw ParamError("wh_encode: kappa must be a power of two");
    if (msg >= kappa) throw ParamError("wh_encode: message out of range");
    BitVector cw(kappa);
    for (uint32_t p = 0; p < kappa; ++p)
        if (wh_bit(msg, p)) cw.set(p, true);
    return cw;
}

/// Message given as a bit string of log2(kappa) bits, most significant first
/// (so "10" encodes the integer 2).
inline BitVector wh_encode(const BitVector& x, uint32_t kappa) {
    uint32_t lk = log2_exact(kappa);
    if (x.size() != lk) throw DimensionError("wh_encode: message must have log2(kappa) bits");
    uint32_t msg = 0;
    for (uint32_t i = 0; i < lk; ++i)
        if (x.get(i)) msg |= uint32_t(1) << (lk - 1 - i);
    return wh_encode_index(msg, kappa);
}

/// The code C = {c_1, ..., c_kappa} with c_j the encoding of message j-1.
/// c_1 is the all-zero codeword. Pairwise distance is exactly kappa/2.
class WHCode {
  public:
    explicit WHCode(uint32_t kappa) : kappa_(kappa) {
        if (!is_power_of_two(kappa) || kappa < 2)
            throw ParamError("WHCode: kappa must be a power of two >= 2");
        words_.reserve(kappa);
        for (uint32_t j = 0; j < kappa; ++j) {
            words_.push_back(wh_encode_index(j, kappa));
            index_.emplace(key(words_.back()), uint16_t(j + 1));
        }
    }

    uint32_t kappa() const { return kappa_; }

    /// 1-based codeword access.
    const BitVector& codeword(uint32_t j) const {
        if (j < 1 || j > kappa_) throw ParamError("codeword index out of [1, kappa]");
        return words_[j - 1];
    }

    std::optional<uint16_t> find(const BitVector& v) const {
        if (v.size() != kappa_) throw DimensionError("is_codeword: length != kappa");
        auto it = index_.find(key(v));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

  private:
    static std::string key(const BitVector& v) {
        auto b = v.to_bytes();
        return std::string(b.begin(), b.end());
    }

    uint32_t kappa_;
    std::vector<BitVector> words_;
    std::unordered_map<std::string, uint16_t> index_;
};

inline std::optional<uint16_t> is_codeword(const BitVector& v, const WHCode& code) {
    return code.find(v);
}

/// The code with the positions in pruned_at deleted from every codeword.
/// For |pruned_at| < kappa/2 the pruned codewords stay pairwise distinct with
/// distance at least kappa/2 - |pruned_at|.
class PrunedCode {
  public:
    PrunedCode(const WHCode& base, IndexSet pruned_at)
        : kappa_(base.kappa()), pruned_at_(std::move(pruned_at)) {
        for (uint32_t p : pruned_at_)
            if (p > kappa_) throw ParamError("PrunedCode: index out of range");
        pruned_.reserve(kappa_);
        for (uint32_t j = 1; j <= kappa_; ++j)
            pruned_.push_back(prune(base.codeword(j), pruned_at_));
    }

    uint32_t kappa() const { return kappa_; }
    const IndexSet& pruned_at() const { return pruned_at_; }
    size_t pruned_length() const { return kappa_ - pruned_at_.size(); }
    const BitVector& pruned_codeword(uint32_t j) const { return pruned_[j - 1]; }

  private:
    uint32_t kappa_;
    IndexSet pruned_at_;
    std::vector<BitVector> pruned_;
};

/// Exact-match decoding against a pruned code, linear scan over the kappa
/// candidates. Requires |pruned_at| < kappa/2 so the match is unique.
inline std::optional<uint16_t> decode_pruned(const BitVector& v, const PrunedCode& pc) {
    if (pc.pruned_at().size() >= pc.kappa() / 2)
        throw ParamError("decode_pruned: pruned set too large, decoding is ambiguous");
    if (v.size() != pc.pruned_length())
        throw DimensionError("decode_pruned: length mismatch");
    for (uint32_t j = 1; j <= pc.kappa(); ++j)
        if (pc.pruned_codeword(j) == v) return uint16_t(j);
    return std::nullopt;
}

/// Compresses nu strings with the given random combiner bits and accepts iff
/// the combination is a codeword. A set containing a non-codeword is rejected
/// with probability at least 1/2 over uniform combiners.
inline bool linearity_test(const std::vector<BitVector>& ys, const BitVector& combiner,
                           const WHCode& code) {
    if (combiner.size() != ys.size())
        throw DimensionError("linearity_test: combiner length != string count");
    BitVector acc(code.kappa());
    for (size_t i = 0; i < ys.size(); ++i)
        if (combiner.get(i)) acc.xor_with(ys[i]);
    return is_codeword(acc, code).has_value();
}

/// Pruned-code variant of the test above.
inline bool linearity_test_pruned(const std::vector<BitVector>& ys, const BitVector& combiner,
                                  const PrunedCode& pc) {
    if (combiner.size() != ys.size())
        throw DimensionError("linearity_test: combiner length != string count");
    BitVector acc(pc.pruned_length());
    for (size_t i = 0; i < ys.size(); ++i)
        if (combiner.get(i)) acc.xor_with(ys[i]);
    for (uint32_t j = 1; j <= pc.kappa(); ++j)
        if (pc.pruned_codeword(j) == acc) return true;
    return false;
}

}  // namespace otx
