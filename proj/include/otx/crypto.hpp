#pragma once

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <random>
#include <string_view>
#include <vector>

#include "otx/bits.hpp"
#include "otx/error.hpp"

namespace otx {

namespace detail {

struct MdCtx {
    EVP_MD_CTX* p;
    MdCtx() : p(EVP_MD_CTX_new()) {
        if (!p) throw Error("EVP_MD_CTX_new failed");
    }
    ~MdCtx() { EVP_MD_CTX_free(p); }
};

struct CipherCtx {
    EVP_CIPHER_CTX* p;
    CipherCtx() : p(EVP_CIPHER_CTX_new()) {
        if (!p) throw Error("EVP_CIPHER_CTX_new failed");
    }
    ~CipherCtx() { EVP_CIPHER_CTX_free(p); }
};

inline void sha256(const uint8_t* data, size_t len, uint8_t out[32]) {
    thread_local MdCtx ctx;
    unsigned int olen = 32;
    if (EVP_DigestInit_ex(ctx.p, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.p, data, len) != 1 ||
        EVP_DigestFinal_ex(ctx.p, out, &olen) != 1)
        throw Error("SHA-256 failed");
}

// AES-128-CTR keystream: encrypts zeros under (key, initial counter block).
inline void aes128_ctr_stream(const uint8_t key[16], const uint8_t iv[16],
                              uint8_t* out, size_t len) {
    thread_local CipherCtx ctx;
    if (EVP_EncryptInit_ex(ctx.p, EVP_aes_128_ctr(), nullptr, key, iv) != 1)
        throw Error("AES-CTR init failed");
    std::memset(out, 0, len);
    int olen = 0;
    if (EVP_EncryptUpdate(ctx.p, out, &olen, out, int(len)) != 1 ||
        size_t(olen) != len)
        throw Error("AES-CTR failed");
}

}  // namespace detail

/// H(i, row): SHA-256 over LE64(i) || packed(row), truncated to ceil(ell/8)
/// bytes and masked to ell bits. out must hold ceil(ell/8) bytes.
inline void ro_mask_into(uint64_t index, const uint8_t* row, size_t row_bytes,
                         uint32_t ell, uint8_t* out) {
    if (ell == 0 || ell > 256) throw ParamError("ro_mask: ell must be in [1, 256]");
    std::array<uint8_t, 8 + 64> buf;
    for (int k = 0; k < 8; ++k) buf[k] = uint8_t(index >> (8 * k));
    if (row_bytes > 64) throw ParamError("ro_mask: row too long");
    std::memcpy(buf.data() + 8, row, row_bytes);
    uint8_t digest[32];
    detail::sha256(buf.data(), 8 + row_bytes, digest);
    size_t ob = (ell + 7) / 8;
    std::memcpy(out, digest, ob);
    if (ell % 8) out[ob - 1] &= uint8_t(0xFF >> (8 - ell % 8));
}

inline BitVector ro_mask(uint64_t index, const BitVector& row, uint32_t ell) {
    auto rb = row.to_bytes();
    uint8_t out[32];
    ro_mask_into(index, rb.data(), rb.size(), ell, out);
    return BitVector::from_bytes(out, ell);
}

/// G(seed): AES-128-CTR keystream with key = seed bits 0..127 and counter
/// block = seed bits 128..255, each zero-padded when the seed is shorter.
inline void prg_expand_into(const BitVector& seed, uint8_t* out, size_t out_bytes) {
    uint8_t key[16] = {0}, iv[16] = {0};
    auto sb = seed.to_bytes();
    std::memcpy(key, sb.data(), std::min<size_t>(sb.size(), 16));
    if (sb.size() > 16) std::memcpy(iv, sb.data() + 16, std::min<size_t>(sb.size() - 16, 16));
    detail::aes128_ctr_stream(key, iv, out, out_bytes);
}

inline BitVector prg_expand(const BitVector& seed, size_t out_bits) {
    if (out_bits == 0) throw ParamError("prg_expand: out_bits must be >= 1");
    std::vector<uint8_t> buf((out_bits + 7) / 8);
    prg_expand_into(seed, buf.data(), buf.size());
    return BitVector::from_bytes(buf.data(), out_bits);
}

/// Deterministic random stream for protocol randomness. Seeded either from OS
/// entropy or, for reproducible runs, from a (seed, tag) pair; distinct tags
/// give independent streams.
class Rng {
  public:
    Rng() {
        std::random_device rd;
        for (auto& b : key_) b = uint8_t(rd());
        for (auto& b : ctr_) b = uint8_t(rd());
    }

    Rng(uint64_t seed, std::string_view tag) {
        std::vector<uint8_t> material(tag.begin(), tag.end());
        for (int k = 0; k < 8; ++k) material.push_back(uint8_t(seed >> (8 * k)));
        uint8_t digest[32];
        detail::sha256(material.data(), material.size(), digest);
        std::memcpy(key_.data(), digest, 16);
        std::memcpy(ctr_.data(), digest + 16, 16);
    }

    void fill(uint8_t* out, size_t len) {
        while (len > 0) {
            if (pos_ == buf_.size()) refill();
            size_t take = std::min(len, buf_.size() - pos_);
            std::memcpy(out, buf_.data() + pos_, take);
            pos_ += take;
            out += take;
            len -= take;
        }
    }

    uint64_t next_u64() {
        uint8_t b[8];
        fill(b, 8);
        uint64_t v = 0;
        for (int k = 0; k < 8; ++k) v |= uint64_t(b[k]) << (8 * k);
        return v;
    }

    /// Uniform in [0, n), rejection-sampled.
    uint64_t below(uint64_t n) {
        if (n == 0) throw ParamError("Rng::below(0)");
        uint64_t limit = ~uint64_t(0) - (~uint64_t(0) % n);
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    bool coin() { return next_u64() & 1; }

    BitVector bits(size_t n) {
        std::vector<uint8_t> b((n + 7) / 8);
        fill(b.data(), b.size());
        return BitVector::from_bytes(b.data(), n);
    }

  private:
    void refill() {
        detail::aes128_ctr_stream(key_.data(), ctr_.data(), buf_.data(), buf_.size());
        // advance the counter past the blocks just produced
        uint64_t blocks = buf_.size() / 16;
        for (int k = 15; k >= 0 && blocks; --k) {
            uint64_t sum = uint64_t(ctr_[k]) + (blocks & 0xFF);
            ctr_[k] = uint8_t(sum);
            blocks = (blocks >> 8) + (sum >> 8);
        }
        pos_ = 0;
    }

    std::array<uint8_t, 16> key_{}, ctr_{};
    std::array<uint8_t, 4096> buf_{};
    size_t pos_ = buf_.size();
};

/// Both parties derive the mu check combiners w^(1)..w^(mu), each m_batch+mu
/// bits, from the exchanged coin-toss shares: the master seed is SHA-256 of
/// s_S || s_R truncated to kappa bits, expanded through the PRG.
inline std::vector<BitVector> derive_combiners(const BitVector& share_s,
                                               const BitVector& share_r,
                                               size_t mu, size_t m_batch) {
    if (share_s.size() != share_r.size())
        throw DimensionError("coin toss shares must have equal length");
    size_t kappa = share_s.size();
    if (kappa > 256) throw ParamError("coin toss: kappa > 256 unsupported");
    auto bs = share_s.to_bytes();
    auto br = share_r.to_bytes();
    std::vector<uint8_t> material;
    material.insert(material.end(), bs.begin(), bs.end());
    material.insert(material.end(), br.begin(), br.end());
    uint8_t digest[32];
    detail::sha256(material.data(), material.size(), digest);
    BitVector master = BitVector::from_bytes(digest, kappa);

    size_t vec_len = m_batch + mu;
    BitVector stream = prg_expand(master, mu * vec_len);
    std::vector<BitVector> w;
    w.reserve(mu);
    for (size_t l = 0; l < mu; ++l) {
        BitVector v(vec_len);
        for (size_t i = 0; i < vec_len; i += 64) {
            size_t take = std::min<size_t>(64, vec_len - i);
            v.set_bits(i, take, stream.get_bits(l * vec_len + i, take));
        }
        w.push_back(std::move(v));
    }
    return w;
}

}  // namespace otx
