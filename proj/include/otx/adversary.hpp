#pragma once

// Malicious-receiver strategies and the transcript-extraction oracle. This
// header is for security testing only: a build must opt in explicitly, so the
// library cannot ship with adversarial code paths enabled by accident.
#ifndef OTX_ENABLE_INSECURE_ATTACK
#error "otx/adversary.hpp is a testing-only attack harness; define OTX_ENABLE_INSECURE_ATTACK to use it"
#endif

#include <cstdint>
#include <optional>
#include <vector>

#include "otx/base_ot.hpp"
#include "otx/bits.hpp"
#include "otx/crypto.hpp"
#include "otx/error.hpp"
#include "otx/params.hpp"
#include "otx/protocol.hpp"
#include "otx/wh.hpp"
#include "otx/wire.hpp"

namespace otx::adversary {

/// Bit flips applied to an honest E matrix: (1-based row, positions) pairs.
struct TweakSpec {
    std::vector<std::pair<uint64_t, IndexSet>> flips;
};

/// Rows of the tampered matrix: row i (i <= kappa) is c_{r_i} with bit i
/// flipped; later rows stay honest. With m < kappa the tampering covers only
/// the first m rows, so only m bits of s become recoverable.
inline std::pair<TweakSpec, std::vector<BitVector>> build_tweaked_E(
    const std::vector<uint16_t>& choices, uint32_t kappa, uint64_t m,
    const WHCode& code) {
    if (choices.size() != m) throw ParamError("build_tweaked_E: choices length != m");
    TweakSpec spec;
    std::vector<BitVector> rows;
    rows.reserve(m);
    for (uint64_t i = 0; i < m; ++i) {
        BitVector row = code.codeword(choices[i]);
        if (i < kappa) {
            row.set(i, !row.get(i));
            spec.flips.emplace_back(i + 1, IndexSet({uint32_t(i + 1)}));
        }
        rows.push_back(std::move(row));
    }
    return {std::move(spec), std::move(rows)};
}

/// The two candidate pads collide, so this row cannot distinguish s_i.
struct PadAmbiguity : Error {
    using Error::Error;
};

/// Recovers s_i from one tampered row: the pad y xor x equals
/// H(i, b_i xor 0^{i-1} s_i 0^{kappa-i}), so two oracle calls decide the bit.
/// `flip_pos` is the 1-based tampered position (i itself in the basic attack).
inline int recover_s_bit(uint64_t index, const BitVector& b_row, uint32_t flip_pos,
                         const BitVector& y_chosen, const BitVector& x_chosen,
                         uint32_t ell, uint64_t& query_counter) {
    BitVector pad = xor_vec(y_chosen, x_chosen);
    BitVector flipped = b_row;
    flipped.set(flip_pos - 1, !flipped.get(flip_pos - 1));
    BitVector q0 = ro_mask(index, b_row, ell);
    BitVector q1 = ro_mask(index, flipped, ell);
    query_counter += 2;
    bool m0 = (q0 == pad), m1 = (q1 == pad);
    if (m0 && m1) throw PadAmbiguity("both candidate pads match");
    if (m0) return 0;
    if (m1) return 1;
    throw Error("recover_s_bit: inconsistent transcript, neither pad matches");
}

struct AttackReport {
    bool aborted = false;           // peer aborted (active mode caught us)
    AbortReason abort_reason = AbortReason::none;
    BitVector s;                    // recovered sender correlation vector
    SenderInputs inputs;            // full recovered input table
    uint64_t queries_s = 0;         // oracle calls spent on s recovery
    uint64_t queries_unmask = 0;    // oracle calls spent unmasking x_{i,j}, j != r_i
    uint64_t queries_chosen = 0;    // ordinary receiver decryptions for i > kappa
};

/// The malicious-receiver attack: run the protocol with the tampered E, use
/// the a-priori-known chosen inputs to recover s bit by bit (two oracle calls
/// each), then unmask every other input of the sender.
///
/// known_chosen[i] must hold x_{i+1, r_{i+1}} for at least the first kappa
/// rows; rows kappa+1..2kappa (when m >= 2kappa) carry backup tampering at
/// the same positions and are consulted only if a pad collision makes a bit
/// ambiguous, which keeps the attack deterministic at small ell.
inline AttackReport full_attack(Channel& ch, const Params& params,
                                const std::vector<uint16_t>& choices,
                                const std::vector<BitVector>& known_chosen,
                                Rng& rng) {
    params.validate();
    if (choices.size() != params.m) throw ParamError("full_attack: choices length != m");
    uint32_t kappa = params.kappa;
    uint64_t m = params.m;
    if (params.batch_count() != 1)
        throw ParamError("full_attack: single-batch sessions only (batch_size >= m)");
    AttackReport rep;
    handshake(ch, params);
    WHCode code(kappa);

    // Seed OT phase, honest.
    SeedPairs pairs = SeedPairs::random(kappa, rng);
    IdealDealerBaseOt dealer;
    dealer.run_dealer(ch, pairs);

    // Phase I with tampered E: primary flips on rows [1, kappa], backup flips
    // at the same positions on rows [kappa+1, 2kappa] when available.
    auto [spec, erows] = build_tweaked_E(choices, kappa, m, code);
    uint64_t backups = (m >= 2 * uint64_t(kappa)) ? kappa : 0;
    for (uint64_t i = 0; i < backups; ++i)
        erows[kappa + i].set(i, !erows[kappa + i].get(i));

    uint64_t rows = m + params.mu;
    BitMatrix Et(kappa, rows);
    for (uint64_t i = 0; i < m; ++i) Et.set_col(i, erows[i]);
    for (uint64_t i = m; i < rows; ++i)
        Et.set_col(i, code.codeword(uint16_t(rng.below(kappa) + 1)));
    BitMatrix E = transpose(Et);

    BitMatrix B(rows, kappa), D(rows, kappa);
    for (uint32_t j = 0; j < kappa; ++j) {
        BitVector bj = prg_expand(pairs.pairs[j].first, rows);
        B.set_col(j, bj);
        bj.xor_with(prg_expand(pairs.pairs[j].second, rows));
        bj.xor_with(E.col(j));
        D.set_col(j, bj);
    }
    ch.send_msg(MsgType::matrix_d, D.serialize());
    BitMatrix Bt = transpose(B);

    PackedValues y;
    try {
        if (params.mode == Mode::active) {
            // Play along with the check: send the parity honestly and the
            // index of the nearest codeword to the (non-codeword) combination.
            auto W = coin_toss(ch, Role::receiver, kappa, params.mu, m, rng);
            std::vector<CheckTuple> tuples;
            for (auto& w : W) {
                BitVector e = combine_rows(E, w);
                uint16_t best = 1;
                size_t best_d = kappa + 1;
                for (uint32_t j = 1; j <= kappa; ++j) {
                    size_t d = hdi(e, code.codeword(j)).size();
                    if (d < best_d) {
                        best_d = d;
                        best = uint16_t(j);
                    }
                }
                tuples.push_back({best, uint8_t(parity(combine_rows(B, w)))});
            }
            ch.send_msg(MsgType::checks, encode_checks(tuples));
        }
        auto payload = ch.recv_expect(MsgType::masked);
        uint64_t want_bits = m * params.n * params.ell;
        if (payload.size() != (want_bits + 7) / 8)
            throw ProtocolError(AbortReason::malformed_message, "masked block: bad size");
        y = PackedValues(m * params.n, params.ell);
        y.raw() = BitVector::from_bytes(payload.data(), want_bits);
    } catch (const PeerAbort& e) {
        rep.aborted = true;
        rep.abort_reason = e.reason;
        return rep;
    }

    // Recover s: row i decides bit i. On a pad collision fall back to the
    // backup row carrying the same flipped position.
    uint32_t recoverable = uint32_t(std::min<uint64_t>(kappa, m));
    if (known_chosen.size() < recoverable)
        throw ParamError("full_attack: need known chosen inputs for the first kappa rows");
    rep.s = BitVector(kappa);
    auto chosen_y = [&](uint64_t i) {
        std::vector<uint8_t> buf((params.ell + 7) / 8);
        y.get_bytes(i * params.n + (choices[i] - 1), buf.data());
        return BitVector::from_bytes(buf.data(), params.ell);
    };
    for (uint32_t i = 0; i < recoverable; ++i) {
        int bit;
        try {
            bit = recover_s_bit(i + 1, Bt.col(i), i + 1, chosen_y(i), known_chosen[i],
                                params.ell, rep.queries_s);
        } catch (const PadAmbiguity&) {
            if (backups == 0 || known_chosen.size() < kappa + i + 1) throw;
            bit = recover_s_bit(kappa + i + 1, Bt.col(kappa + i), i + 1,
                                chosen_y(kappa + i), known_chosen[kappa + i],
                                params.ell, rep.queries_s);
        }
        rep.s.set(i, bit);
    }

    // Unmask the full input table: pad(i,j) = H(i, b_i xor (s . (e_i xor c_j))).
    rep.inputs = SenderInputs(m, params.n, params.ell);
    size_t kb = (kappa + 7) / 8;
    std::vector<uint8_t> brow(kb), query(kb), val(rep.inputs.vals.value_bytes());
    uint8_t pad[32];
    for (uint64_t i = 0; i < m; ++i) {
        Bt.col_bytes_into(i, brow.data());
        for (uint32_t j = 1; j <= params.n; ++j) {
            if (j == choices[i] && i < recoverable) {
                rep.inputs.vals.set_from_bytes(rep.inputs.flat(i, j - 1),
                                               known_chosen[i].to_bytes().data());
                continue;
            }
            BitVector diff = and_vec(rep.s, xor_vec(erows[i], code.codeword(j)));
            diff.write_bytes(query.data());
            for (size_t k = 0; k < kb; ++k) query[k] ^= brow[k];
            ro_mask_into(i + 1, query.data(), kb, params.ell, pad);
            y.get_bytes(i * params.n + (j - 1), val.data());
            for (size_t k = 0; k < val.size(); ++k) val[k] ^= pad[k];
            rep.inputs.vals.set_from_bytes(rep.inputs.flat(i, j - 1), val.data());
            if (j == choices[i])
                rep.queries_chosen++;
            else
                rep.queries_unmask++;
        }
    }
    return rep;
}

/// Outcome of the transcript-extraction oracle.
struct ExtractionResult {
    bool aborted = false;
    IndexSet T;
    std::vector<uint16_t> choices;  // decoded codeword index per row
};

/// Extraction from a committed E matrix and the check transcript: T collects
/// the positions where each combined row differs from the claimed codeword;
/// extraction aborts when |T| >= kappa/2 or any pruned row fails to decode.
inline ExtractionResult extract_choices(const BitMatrix& E,
                                        const std::vector<BitVector>& W,
                                        const std::vector<CheckTuple>& tuples,
                                        const WHCode& code) {
    if (tuples.size() != W.size())
        throw ParamError("extract_choices: tuple count != combiner count");
    ExtractionResult res;
    for (size_t l = 0; l < W.size(); ++l) {
        if (tuples[l].alpha < 1 || tuples[l].alpha > code.kappa()) {
            res.aborted = true;
            return res;
        }
        res.T.unite(hdi(combine_rows(E, W[l]), code.codeword(tuples[l].alpha)));
    }
    if (res.T.size() >= code.kappa() / 2) {
        res.aborted = true;
        return res;
    }
    PrunedCode pc(code, res.T);
    res.choices.reserve(E.rows());
    for (uint64_t i = 0; i < E.rows(); ++i) {
        auto idx = decode_pruned(prune(E.row(i), res.T), pc);
        if (!idx) {
            res.aborted = true;
            res.choices.clear();
            return res;
        }
        res.choices.push_back(*idx);
    }
    return res;
}

}  // namespace otx::adversary
