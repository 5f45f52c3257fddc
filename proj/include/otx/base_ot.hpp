#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "otx/bits.hpp"
#include "otx/crypto.hpp"
#include "otx/error.hpp"
#include "otx/wire.hpp"

namespace otx {

/// kappa pairs (k0_j, k1_j) of kappa-bit seeds; the extension receiver's
/// private input to the seed OTs (roles are reversed there).
struct SeedPairs {
    std::vector<std::pair<BitVector, BitVector>> pairs;

    static SeedPairs random(uint32_t kappa, Rng& rng) {
        SeedPairs sp;
        sp.pairs.reserve(kappa);
        for (uint32_t j = 0; j < kappa; ++j)
            sp.pairs.emplace_back(rng.bits(kappa), rng.bits(kappa));
        return sp;
    }

    void check(uint32_t kappa) const {
        if (pairs.size() != kappa)
            throw ParamError("seed pairs: expected kappa pairs");
        for (auto& [k0, k1] : pairs)
            if (k0.size() != kappa || k1.size() != kappa)
                throw ParamError("seed pairs: each seed must be kappa bits");
    }
};

/// The extension sender's choice vector s for the seed OTs.
struct BaseChoice {
    BitVector s;
};

/// Seeds the extension sender ends up with: output[j] = pairs[j] selected by s_j.
struct SeedOutputs {
    std::vector<BitVector> seeds;
};

/// The selection rule of the ideal functionality, as a pure function.
inline SeedOutputs select_seeds(const SeedPairs& sp, const BaseChoice& choice) {
    uint32_t kappa = uint32_t(choice.s.size());
    sp.check(kappa);
    SeedOutputs out;
    out.seeds.reserve(kappa);
    for (uint32_t j = 0; j < kappa; ++j)
        out.seeds.push_back(choice.s.get(j) ? sp.pairs[j].second : sp.pairs[j].first);
    return out;
}

/// Contract any seed-OT backend must satisfy: the extension sender obtains
/// exactly the seeds selected by s, and learns nothing about the unselected
/// seeds while the peer learns nothing about s.
class BaseOtProvider {
  public:
    virtual ~BaseOtProvider() = default;
    virtual SeedOutputs run_chooser(Channel& ch, const BaseChoice& choice) = 0;
    virtual void run_dealer(Channel& ch, const SeedPairs& pairs) = 0;
};

/// TEST MODE ONLY. The dealer transmits both seeds of every pair in the clear
/// and the chooser selects locally. Functionally correct, intentionally
/// insecure; its traffic is accounted in the base_ot bucket, never in the
/// extension-phase counts. Swap in a real base OT behind BaseOtProvider for
/// anything beyond benchmarking.
class IdealDealerBaseOt : public BaseOtProvider {
  public:
    SeedOutputs run_chooser(Channel& ch, const BaseChoice& choice) override {
        uint32_t kappa = uint32_t(choice.s.size());
        auto payload = ch.recv_expect(MsgType::seed_pairs);
        size_t sb = (kappa + 7) / 8;
        if (payload.size() != size_t(kappa) * 2 * sb)
            throw ProtocolError(AbortReason::malformed_message,
                                "seed pairs: wrong payload size");
        SeedOutputs out;
        out.seeds.reserve(kappa);
        for (uint32_t j = 0; j < kappa; ++j) {
            const uint8_t* base = payload.data() + size_t(j) * 2 * sb;
            const uint8_t* sel = choice.s.get(j) ? base + sb : base;
            out.seeds.push_back(BitVector::from_bytes(sel, kappa));
        }
        return out;
    }

    void run_dealer(Channel& ch, const SeedPairs& pairs) override {
        uint32_t kappa = uint32_t(pairs.pairs.size());
        pairs.check(kappa);
        size_t sb = (kappa + 7) / 8;
        std::vector<uint8_t> payload(size_t(kappa) * 2 * sb);
        for (uint32_t j = 0; j < kappa; ++j) {
            pairs.pairs[j].first.write_bytes(payload.data() + size_t(j) * 2 * sb);
            pairs.pairs[j].second.write_bytes(payload.data() + size_t(j) * 2 * sb + sb);
        }
        ch.send_msg(MsgType::seed_pairs, payload);
    }
};

}  // namespace otx
