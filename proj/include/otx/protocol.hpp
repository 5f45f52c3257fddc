#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "otx/base_ot.hpp"
#include "otx/bits.hpp"
#include "otx/crypto.hpp"
#include "otx/error.hpp"
#include "otx/params.hpp"
#include "otx/stats.hpp"
#include "otx/wh.hpp"
#include "otx/wire.hpp"

namespace otx {

/// A flat array of fixed-width values, bit-packed back to back: value k
/// occupies bits [k*ell, (k+1)*ell), LSB-first. This is also the wire layout
/// of the masked output block.
class PackedValues {
  public:
    PackedValues() = default;
    PackedValues(uint64_t count, uint32_t ell)
        : count_(count), ell_(ell), bits_(count * ell) {}

    uint64_t count() const { return count_; }
    uint32_t ell() const { return ell_; }
    size_t value_bytes() const { return (ell_ + 7) / 8; }

    /// Value as an integer; only valid for ell <= 64.
    uint64_t get_small(uint64_t idx) const { return bits_.get_bits(idx * ell_, ell_); }
    void set_small(uint64_t idx, uint64_t v) { bits_.set_bits(idx * ell_, ell_, v); }

    /// Value as ceil(ell/8) LSB-first bytes.
    void get_bytes(uint64_t idx, uint8_t* out) const {
        uint64_t pos = idx * ell_;
        for (uint32_t left = ell_; left > 0;) {
            uint32_t take = std::min<uint32_t>(left, 64);
            uint64_t chunk = bits_.get_bits(pos, take);
            for (uint32_t k = 0; k < (take + 7) / 8; ++k) *out++ = uint8_t(chunk >> (8 * k));
            pos += take;
            left -= take;
        }
    }

    void set_from_bytes(uint64_t idx, const uint8_t* in) {
        uint64_t pos = idx * ell_;
        for (uint32_t left = ell_; left > 0;) {
            uint32_t take = std::min<uint32_t>(left, 64);
            uint64_t chunk = 0;
            for (uint32_t k = 0; k < (take + 7) / 8; ++k) chunk |= uint64_t(in[k]) << (8 * k);
            bits_.set_bits(pos, take, chunk);
            pos += take;
            left -= take;
            in += (take + 7) / 8;
        }
    }

    const BitVector& raw() const { return bits_; }
    BitVector& raw() { return bits_; }

    bool operator==(const PackedValues& o) const {
        return count_ == o.count_ && ell_ == o.ell_ && bits_ == o.bits_;
    }

  private:
    uint64_t count_ = 0;
    uint32_t ell_ = 0;
    BitVector bits_;
};

/// The sender's m tuples of n values, ell bits each.
struct SenderInputs {
    uint64_t m = 0;
    uint32_t n = 0;
    uint32_t ell = 0;
    PackedValues vals;

    SenderInputs() = default;
    SenderInputs(uint64_t m_, uint32_t n_, uint32_t ell_)
        : m(m_), n(n_), ell(ell_), vals(m_ * uint64_t(n_), ell_) {}

    uint64_t flat(uint64_t i, uint32_t j) const { return i * n + j; }
    uint64_t get(uint64_t i, uint32_t j) const { return vals.get_small(flat(i, j)); }
    void set(uint64_t i, uint32_t j, uint64_t v) { vals.set_small(flat(i, j), v); }
};

/// Deterministic benchmark/test inputs; with the same seed both ends of a
/// harness regenerate identical values.
inline SenderInputs derive_inputs(uint64_t seed, uint64_t m, uint32_t n, uint32_t ell) {
    Rng rng(seed, "sender-inputs");
    SenderInputs in(m, n, ell);
    in.vals.raw() = rng.bits(m * uint64_t(n) * ell);
    return in;
}

inline std::vector<uint16_t> derive_choices(uint64_t seed, uint64_t m, uint32_t n) {
    Rng rng(seed, "receiver-choices");
    std::vector<uint16_t> r(m);
    for (auto& v : r) v = uint16_t(rng.below(n) + 1);
    return r;
}

/// One check-phase element: codeword index of e^(l), parity bit of b^(l).
/// On the wire: alpha as u16 LE, b as u8.
struct CheckTuple {
    uint16_t alpha = 0;
    uint8_t b = 0;
};

inline std::vector<uint8_t> encode_checks(const std::vector<CheckTuple>& ts) {
    std::vector<uint8_t> out;
    out.reserve(ts.size() * 3);
    for (auto& t : ts) {
        out.push_back(uint8_t(t.alpha));
        out.push_back(uint8_t(t.alpha >> 8));
        out.push_back(t.b);
    }
    return out;
}

inline std::vector<CheckTuple> decode_checks(const std::vector<uint8_t>& payload) {
    if (payload.size() % 3 != 0)
        throw ProtocolError(AbortReason::malformed_message, "checks: bad payload size");
    std::vector<CheckTuple> out(payload.size() / 3);
    for (size_t l = 0; l < out.size(); ++l) {
        out[l].alpha = uint16_t(payload[3 * l]) | uint16_t(uint16_t(payload[3 * l + 1]) << 8);
        out[l].b = payload[3 * l + 2];
    }
    return out;
}

/// Receiver state of one batch after Phase I.
struct ReceiverBatch {
    uint64_t rows = 0;               // m_batch + mu
    std::vector<uint16_t> row_code;  // 1-based codeword index per row of E
    BitMatrix B, E, D;
    BitMatrix Bt;  // B transposed: row i of B is column i here
    BitMatrix Et;  // E transposed, the layout the check phase consumes
};

/// Sender state of one batch after Phase I.
struct SenderBatch {
    uint64_t rows = 0;
    BitVector s;
    BitMatrix A;
    BitMatrix At;
};

/// Phase I, receiver: b^j = G(k0_j); e_i = c_{r_i} for real rows and a random
/// codeword for each of the mu padding rows; d^j = b^j xor G(k1_j) xor e^j.
inline ReceiverBatch receiver_phase1(uint32_t kappa, uint32_t mu,
                                     const uint16_t* choices, uint64_t m_batch,
                                     uint32_t n, const SeedPairs& pairs,
                                     Rng& pad_rng, const WHCode& code) {
    pairs.check(kappa);
    ReceiverBatch rb;
    rb.rows = m_batch + mu;
    rb.row_code.resize(rb.rows);
    for (uint64_t i = 0; i < m_batch; ++i) {
        if (choices[i] < 1 || choices[i] > n)
            throw ParamError("choice out of [1, n] at row " + std::to_string(i));
        rb.row_code[i] = choices[i];
    }
    for (uint64_t i = m_batch; i < rb.rows; ++i)
        rb.row_code[i] = uint16_t(pad_rng.below(kappa) + 1);

    rb.Et = BitMatrix(kappa, rb.rows);
    for (uint64_t i = 0; i < rb.rows; ++i)
        rb.Et.set_col(i, code.codeword(rb.row_code[i]));
    rb.E = transpose(rb.Et);

    rb.B = BitMatrix(rb.rows, kappa);
    rb.D = BitMatrix(rb.rows, kappa);
    for (uint32_t j = 0; j < kappa; ++j) {
        BitVector bj = prg_expand(pairs.pairs[j].first, rb.rows);
        rb.B.set_col(j, bj);
        bj.xor_with(prg_expand(pairs.pairs[j].second, rb.rows));
        bj.xor_with(rb.E.col(j));
        rb.D.set_col(j, bj);
    }
    rb.Bt = transpose(rb.B);
    return rb;
}

/// Phase I, sender: a^j = (s_j . d^j) xor G(k^{s_j}_j).
inline SenderBatch sender_phase1(uint32_t kappa, const BitVector& s,
                                 const SeedOutputs& seeds, const BitMatrix& D) {
    if (D.cols() != kappa)
        throw ProtocolError(AbortReason::malformed_message, "matrix D: wrong column count");
    if (s.size() != kappa || seeds.seeds.size() != kappa)
        throw ParamError("sender_phase1: kappa mismatch");
    SenderBatch sb;
    sb.rows = D.rows();
    sb.s = s;
    sb.A = BitMatrix(sb.rows, kappa);
    for (uint32_t j = 0; j < kappa; ++j) {
        BitVector aj = prg_expand(seeds.seeds[j], sb.rows);
        if (s.get(j)) aj.xor_with(D.col(j));
        sb.A.set_col(j, aj);
    }
    sb.At = transpose(sb.A);
    return sb;
}

/// Checking phase, receiver: per combiner, the codeword index of the combined
/// E rows and the parity bit of the combined B rows.
inline std::vector<CheckTuple> receiver_check(const ReceiverBatch& rb,
                                              const std::vector<BitVector>& W,
                                              const WHCode& code) {
    std::vector<BitVector> es = combine_rows_transposed(rb.Et, W);
    std::vector<BitVector> bs = combine_rows_transposed(rb.Bt, W);
    std::vector<CheckTuple> out;
    out.reserve(W.size());
    for (size_t l = 0; l < W.size(); ++l) {
        auto idx = code.find(es[l]);
        if (!idx)
            throw Error("receiver_check: combined E rows are not a codeword; "
                        "state was not produced by an honest Phase I");
        out.push_back(CheckTuple{*idx, uint8_t(parity(bs[l]))});
    }
    return out;
}

/// Checking phase, sender. Returns the first failing iteration (an index
/// alpha outside [1, kappa] counts as failing), or nullopt if all pass.
inline std::optional<size_t> sender_check(const SenderBatch& sb,
                                          const std::vector<BitVector>& W,
                                          const std::vector<CheckTuple>& tuples,
                                          const WHCode& code) {
    if (tuples.size() != W.size())
        throw ProtocolError(AbortReason::malformed_message, "checks: wrong tuple count");
    std::vector<BitVector> as = combine_rows_transposed(sb.At, W);
    for (size_t l = 0; l < W.size(); ++l) {
        if (tuples[l].alpha < 1 || tuples[l].alpha > code.kappa()) return l;
        int a = parity(as[l]);
        int p = parity(and_vec(sb.s, code.codeword(tuples[l].alpha)));
        if (a != ((tuples[l].b & 1) ^ p)) return l;
    }
    return std::nullopt;
}

/// Phase II, sender: y_{i,j} = x_{i,j} xor H(i, a_i xor (s . c_j)). The index
/// fed to H is global (batch_start + i + 1), so pads never repeat across
/// batches.
inline PackedValues sender_phase2(const SenderBatch& sb, const SenderInputs& inputs,
                                  uint64_t batch_start, uint64_t m_batch,
                                  uint32_t n, uint32_t ell, const WHCode& code) {
    uint32_t kappa = code.kappa();
    size_t kb = (kappa + 7) / 8;
    std::vector<uint8_t> sc(size_t(n) * kb);  // s . c_j for every j
    for (uint32_t j = 0; j < n; ++j)
        and_vec(sb.s, code.codeword(j + 1)).write_bytes(sc.data() + size_t(j) * kb);

    PackedValues out(m_batch * n, ell);
    std::vector<uint8_t> arow(kb), query(kb);
    size_t vb = out.value_bytes();
    std::vector<uint8_t> val(vb);
    uint8_t pad[32];
    for (uint64_t i = 0; i < m_batch; ++i) {
        sb.At.col_bytes_into(i, arow.data());
        for (uint32_t j = 0; j < n; ++j) {
            const uint8_t* scj = sc.data() + size_t(j) * kb;
            for (size_t k = 0; k < kb; ++k) query[k] = arow[k] ^ scj[k];
            ro_mask_into(batch_start + i + 1, query.data(), kb, ell, pad);
            inputs.vals.get_bytes(inputs.flat(batch_start + i, j), val.data());
            for (size_t k = 0; k < vb; ++k) val[k] ^= pad[k];
            out.set_from_bytes(i * n + j, val.data());
        }
    }
    return out;
}

/// Phase II, receiver: z_i = y_{i,r_i} xor H(i, b_i).
inline void receiver_phase2(const ReceiverBatch& rb, const PackedValues& masked,
                            uint64_t batch_start, uint64_t m_batch, uint32_t n,
                            uint32_t ell, PackedValues& z_out) {
    size_t kb = (rb.Bt.rows() + 7) / 8;
    std::vector<uint8_t> brow(kb);
    uint8_t pad[32];
    size_t vb = (ell + 7) / 8;
    std::vector<uint8_t> val(vb);
    for (uint64_t i = 0; i < m_batch; ++i) {
        rb.Bt.col_bytes_into(i, brow.data());
        ro_mask_into(batch_start + i + 1, brow.data(), kb, ell, pad);
        masked.get_bytes(i * n + (rb.row_code[i] - 1), val.data());
        for (size_t k = 0; k < vb; ++k) val[k] ^= pad[k];
        z_out.set_from_bytes(batch_start + i, val.data());
    }
}

// ---------------------------------------------------------------------------
// Networked session
// ---------------------------------------------------------------------------

enum class Role : uint8_t { sender = 0, receiver = 1 };

inline std::vector<uint8_t> encode_hello(const Params& p) {
    std::vector<uint8_t> b;
    b.reserve(kHelloPayloadBytes);
    auto u16 = [&](uint16_t v) {
        b.push_back(uint8_t(v));
        b.push_back(uint8_t(v >> 8));
    };
    u16(kProtocolVersion);
    b.push_back(uint8_t(p.mode));
    u16(uint16_t(p.kappa));
    u16(uint16_t(p.mu));
    for (int k = 0; k < 8; ++k) b.push_back(uint8_t(p.m >> (8 * k)));
    u16(uint16_t(p.n));
    u16(uint16_t(p.ell));
    return b;
}

struct Hello {
    uint16_t version = 0;
    Params params;
};

inline Hello decode_hello(const std::vector<uint8_t>& b) {
    if (b.size() != kHelloPayloadBytes)
        throw ProtocolError(AbortReason::malformed_message, "hello: bad payload size");
    auto u16 = [&](size_t off) { return uint16_t(b[off]) | uint16_t(uint16_t(b[off + 1]) << 8); };
    Hello h;
    h.version = u16(0);
    if (b[2] > uint8_t(Mode::active))
        throw ProtocolError(AbortReason::malformed_message, "hello: bad mode byte");
    h.params.mode = Mode(b[2]);
    h.params.kappa = u16(3);
    h.params.mu = u16(5);
    h.params.m = 0;
    for (int k = 0; k < 8; ++k) h.params.m |= uint64_t(b[7 + k]) << (8 * k);
    h.params.n = u16(15);
    h.params.ell = u16(17);
    return h;
}

/// Exchanges MSG_HELLO both ways and refuses the session unless version and
/// parameters agree. Throws ProtocolError with the refusal reason.
inline void handshake(Channel& ch, const Params& p) {
    ch.send_msg(MsgType::hello, encode_hello(p));
    Hello peer = decode_hello(ch.recv_expect(MsgType::hello));
    if (peer.version != kProtocolVersion) {
        ch.send_abort(AbortReason::version_mismatch);
        throw ProtocolError(AbortReason::version_mismatch, "handshake: version mismatch");
    }
    try {
        peer.params.validate();
    } catch (const ParamError& e) {
        ch.send_abort(AbortReason::invalid_params);
        throw ProtocolError(AbortReason::invalid_params,
                            std::string("handshake: peer sent invalid params: ") + e.what());
    }
    if (!(peer.params == p)) {
        ch.send_abort(AbortReason::param_mismatch);
        throw ProtocolError(AbortReason::param_mismatch, "handshake: parameter mismatch");
    }
}

/// Coin toss realizing the common-coins functionality: R sends its share
/// first, S answers with its own, both expand SHA-256(s_S || s_R) through the
/// PRG into the mu check combiners.
inline std::vector<BitVector> coin_toss(Channel& ch, Role role, uint32_t kappa,
                                        uint32_t mu, uint64_t m_batch, Rng& rng) {
    BitVector mine = rng.bits(kappa);
    size_t kb = (kappa + 7) / 8;
    auto check_len = [&](const std::vector<uint8_t>& payload) {
        if (payload.size() != kb)
            throw ProtocolError(AbortReason::malformed_message, "coin toss: bad share length");
    };
    BitVector share_s, share_r;
    if (role == Role::receiver) {
        ch.send_msg(MsgType::coin_r, mine.to_bytes());
        auto payload = ch.recv_expect(MsgType::coin_s);
        check_len(payload);
        share_s = BitVector::from_bytes(payload, kappa);
        share_r = mine;
    } else {
        auto payload = ch.recv_expect(MsgType::coin_r);
        check_len(payload);
        share_r = BitVector::from_bytes(payload, kappa);
        ch.send_msg(MsgType::coin_s, mine.to_bytes());
        share_s = mine;
    }
    return derive_combiners(share_s, share_r, mu, m_batch);
}

struct SessionResult {
    bool aborted = false;
    AbortReason abort_reason = AbortReason::none;
    uint64_t aborted_batch = 0;
    uint64_t failed_check = 0;  // failing iteration, sender side only
    PackedValues received;  // receiver only: m values of ell bits
    TranscriptStats stats;
};

namespace detail {

class PhaseTimer {
  public:
    explicit PhaseTimer(double& bucket)
        : bucket_(bucket), start_(std::chrono::steady_clock::now()) {}
    ~PhaseTimer() {
        auto dt = std::chrono::steady_clock::now() - start_;
        bucket_ += std::chrono::duration<double, std::milli>(dt).count();
    }

  private:
    double& bucket_;
    std::chrono::steady_clock::time_point start_;
};

inline void finish_stats(TranscriptStats& st, const Channel& ch,
                         std::chrono::steady_clock::time_point t0) {
    st.bytes = ch.counters();
    st.time_ms.total = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
}

}  // namespace detail

/// Runs the sender side of a full session: per batch, seed OTs (roles
/// reversed), Phase I, checking phase in active mode, Phase II. A failed
/// check aborts the session with MSG_ABORT; the result carries the reason.
inline SessionResult run_sender_session(Channel& ch, const Params& params,
                                        const SenderInputs& inputs, Rng& rng,
                                        BaseOtProvider& base_ot) {
    params.validate();
    if (inputs.m != params.m || inputs.n != params.n || inputs.ell != params.ell)
        throw ParamError("sender inputs do not match params");
    SessionResult res;
    res.stats.params = params;
    auto t0 = std::chrono::steady_clock::now();
    handshake(ch, params);
    WHCode code(params.kappa);
    try {
        for (uint64_t b = 0; b < params.batch_count(); ++b) {
            uint64_t start = b * params.batch_size;
            uint64_t mb = params.batch_rows(b);
            res.stats.batches++;

            SeedOutputs seeds;
            BitVector s;
            {
                detail::PhaseTimer t(res.stats.time_ms.seed_ot);
                s = rng.bits(params.kappa);
                seeds = base_ot.run_chooser(ch, BaseChoice{s});
            }
            SenderBatch sb;
            {
                detail::PhaseTimer t(res.stats.time_ms.phase1);
                auto payload = ch.recv_expect(MsgType::matrix_d);
                uint64_t rows = mb + params.mu;
                if (payload.size() != ((rows + 7) / 8) * params.kappa)
                    throw ProtocolError(AbortReason::malformed_message,
                                        "matrix D: bad payload size");
                sb = sender_phase1(params.kappa, s, seeds,
                                   BitMatrix::deserialize(rows, params.kappa, payload));
            }
            if (params.mode == Mode::active) {
                detail::PhaseTimer t(res.stats.time_ms.check);
                auto W = coin_toss(ch, Role::sender, params.kappa, params.mu, mb, rng);
                auto tuples = decode_checks(ch.recv_expect(MsgType::checks));
                if (auto fail = sender_check(sb, W, tuples, code)) {
                    ch.send_abort(AbortReason::check_failed);
                    res.aborted = true;
                    res.abort_reason = AbortReason::check_failed;
                    res.aborted_batch = b;
                    res.failed_check = *fail;
                    res.stats.aborted = true;
                    res.stats.abort_reason = res.abort_reason;
                    break;
                }
            }
            {
                detail::PhaseTimer t(res.stats.time_ms.phase2);
                PackedValues y = sender_phase2(sb, inputs, start, mb, params.n, params.ell, code);
                ch.send_msg(MsgType::masked, y.raw().to_bytes());
            }
        }
    } catch (const PeerAbort& e) {
        res.aborted = true;
        res.abort_reason = e.reason;
        res.stats.aborted = true;
        res.stats.abort_reason = e.reason;
    }
    detail::finish_stats(res.stats, ch, t0);
    return res;
}

/// Runs the receiver side of a full session; on success the result holds the
/// m recovered values z_i.
inline SessionResult run_receiver_session(Channel& ch, const Params& params,
                                          const std::vector<uint16_t>& choices,
                                          Rng& rng, BaseOtProvider& base_ot) {
    params.validate();
    if (choices.size() != params.m)
        throw ParamError("choice vector length does not match params");
    SessionResult res;
    res.stats.params = params;
    res.received = PackedValues(params.m, params.ell);
    auto t0 = std::chrono::steady_clock::now();
    handshake(ch, params);
    WHCode code(params.kappa);
    try {
        for (uint64_t b = 0; b < params.batch_count(); ++b) {
            uint64_t start = b * params.batch_size;
            uint64_t mb = params.batch_rows(b);
            res.stats.batches++;

            SeedPairs pairs;
            {
                detail::PhaseTimer t(res.stats.time_ms.seed_ot);
                pairs = SeedPairs::random(params.kappa, rng);
                base_ot.run_dealer(ch, pairs);
            }
            ReceiverBatch rb;
            {
                detail::PhaseTimer t(res.stats.time_ms.phase1);
                rb = receiver_phase1(params.kappa, params.mu, choices.data() + start, mb,
                                     params.n, pairs, rng, code);
                ch.send_msg(MsgType::matrix_d, rb.D.serialize());
            }
            if (params.mode == Mode::active) {
                detail::PhaseTimer t(res.stats.time_ms.check);
                auto W = coin_toss(ch, Role::receiver, params.kappa, params.mu, mb, rng);
                ch.send_msg(MsgType::checks, encode_checks(receiver_check(rb, W, code)));
            }
            {
                detail::PhaseTimer t(res.stats.time_ms.phase2);
                auto payload = ch.recv_expect(MsgType::masked);
                uint64_t want_bits = mb * params.n * params.ell;
                if (payload.size() != (want_bits + 7) / 8)
                    throw ProtocolError(AbortReason::malformed_message,
                                        "masked block: bad payload size");
                PackedValues y(mb * params.n, params.ell);
                y.raw() = BitVector::from_bytes(payload.data(), want_bits);
                receiver_phase2(rb, y, start, mb, params.n, params.ell, res.received);
            }
        }
    } catch (const PeerAbort& e) {
        res.aborted = true;
        res.abort_reason = e.reason;
        res.stats.aborted = true;
        res.stats.abort_reason = e.reason;
    }
    detail::finish_stats(res.stats, ch, t0);
    return res;
}

}  // namespace otx
