#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "otx/error.hpp"
#include "otx/params.hpp"
#include "otx/wire.hpp"

namespace otx {

struct PhaseTimes {
    double seed_ot = 0;
    double phase1 = 0;
    double check = 0;
    double phase2 = 0;
    double total = 0;
};

/// Per-session accounting: exact per-category byte counts (taken from the
/// framing layer, both directions) and wall-clock per phase.
struct TranscriptStats {
    Params params;
    ByteCounters bytes;
    PhaseTimes time_ms;
    uint64_t batches = 0;
    bool aborted = false;
    AbortReason abort_reason = AbortReason::none;

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"params",
             {{"kappa", params.kappa},
              {"mu", params.mu},
              {"m", params.m},
              {"n", params.n},
              {"ell", params.ell},
              {"batch_size", params.batch_size}}},
            {"mode", mode_name(params.mode)},
            {"bytes",
             {{"base_ot", bytes.base_ot},
              {"matrix_d", bytes.matrix_d},
              {"coin_toss", bytes.coin_toss},
              {"checks", bytes.checks},
              {"masked", bytes.masked},
              {"framing", bytes.framing},
              {"total", bytes.total()}}},
            {"time_ms",
             {{"seed_ot", time_ms.seed_ot},
              {"phase1", time_ms.phase1},
              {"check", time_ms.check},
              {"phase2", time_ms.phase2},
              {"total", time_ms.total}}},
            {"batches", batches},
            {"aborted", aborted},
            {"abort_reason", abort_reason_name(abort_reason)},
        };
    }
};

// version:u16, mode:u8, kappa:u16, mu:u16, m:u64, n:u16, ell:u16
constexpr uint64_t kHelloPayloadBytes = 19;

/// Closed-form byte counts for a session under the fixed wire format. All of
/// these are exact, not estimates; on loopback the measured counters must
/// equal them category by category.
inline ByteCounters predict_bytes(const Params& p) {
    p.validate();
    ByteCounters c;
    uint64_t kb = (p.kappa + 7) / 8;
    uint64_t messages = 2;  // one HELLO each way
    c.framing += 2 * kHelloPayloadBytes;
    for (uint64_t b = 0; b < p.batch_count(); ++b) {
        uint64_t mb = p.batch_rows(b);
        uint64_t rows = mb + p.mu;
        c.base_ot += uint64_t(p.kappa) * 2 * kb;
        c.matrix_d += uint64_t(p.kappa) * ((rows + 7) / 8);
        c.masked += (mb * p.n * p.ell + 7) / 8;
        messages += 3;
        if (p.mode == Mode::active) {
            c.coin_toss += 2 * kb;
            c.checks += uint64_t(p.mu) * 3;
            messages += 3;
        }
    }
    c.framing += messages * kFrameHeaderBytes;
    return c;
}

/// Bytes in the extension-phase categories (everything except the seed-OT
/// transfer and framing), the quantity the communication benchmarks gate on.
inline uint64_t extension_bytes(const ByteCounters& c) {
    return c.matrix_d + c.masked + c.checks + c.coin_toss;
}

struct CategoryReport {
    std::string name;
    uint64_t predicted = 0;
    uint64_t measured = 0;
    double rel_error = 0;
};

struct PredictionReport {
    std::vector<CategoryReport> categories;
    double max_extension_rel_error = 0;
};

inline PredictionReport measure_vs_predict(const ByteCounters& measured,
                                           const ByteCounters& predicted) {
    auto rel = [](uint64_t pred, uint64_t meas) {
        if (pred == 0 && meas == 0) return 0.0;
        uint64_t hi = std::max(pred, meas), lo = std::min(pred, meas);
        return double(hi - lo) / double(std::max<uint64_t>(pred, 1));
    };
    PredictionReport r;
    auto add = [&](const char* name, uint64_t pred, uint64_t meas, bool ext) {
        CategoryReport cr{name, pred, meas, rel(pred, meas)};
        if (ext) r.max_extension_rel_error = std::max(r.max_extension_rel_error, cr.rel_error);
        r.categories.push_back(std::move(cr));
    };
    add("base_ot", predicted.base_ot, measured.base_ot, false);
    add("matrix_d", predicted.matrix_d, measured.matrix_d, true);
    add("coin_toss", predicted.coin_toss, measured.coin_toss, true);
    add("checks", predicted.checks, measured.checks, true);
    add("masked", predicted.masked, measured.masked, true);
    add("framing", predicted.framing, measured.framing, false);
    return r;
}

}  // namespace otx
