#pragma once

#include <cstdint>
#include <string>

#include "otx/error.hpp"
#include "otx/wh.hpp"

namespace otx {

constexpr uint16_t kProtocolVersion = 1;

enum class Mode : uint8_t {
    semi_honest = 0,
    active = 1,
};

inline const char* mode_name(Mode m) {
    return m == Mode::active ? "active" : "semi-honest";
}

/// Session parameters. kappa is both the code length and the seed width; mu
/// doubles as the check count and the number of padding rows; n inputs of ell
/// bits per OT, m OTs overall, processed in batches.
struct Params {
    uint32_t kappa = 256;
    uint32_t mu = 96;
    uint64_t m = 0;
    uint32_t n = 2;
    uint32_t ell = 1;
    Mode mode = Mode::active;
    uint64_t batch_size = 65536;

    void validate() const {
        if (!is_power_of_two(kappa) || kappa < 2 || kappa > 256)
            throw ParamError("kappa must be a power of two in [2, 256]");
        if (!is_power_of_two(n) || n < 2)
            throw ParamError("n must be a power of two >= 2");
        if (n > kappa) throw ParamError("n must not exceed kappa");
        if (ell < 1 || ell > 256) throw ParamError("ell must be in [1, 256]");
        if (m < 1) throw ParamError("m must be >= 1");
        if (mode == Mode::active && mu < 1)
            throw ParamError("active mode requires mu >= 1");
        if (mode == Mode::semi_honest && mu != 0)
            throw ParamError("semi-honest mode requires mu == 0");
        if (batch_size < 1) throw ParamError("batch_size must be >= 1");
    }

    uint64_t batch_count() const { return (m + batch_size - 1) / batch_size; }

    uint64_t batch_rows(uint64_t b) const {
        uint64_t start = b * batch_size;
        return std::min<uint64_t>(batch_size, m - start);
    }

    bool operator==(const Params& o) const {
        return kappa == o.kappa && mu == o.mu && m == o.m && n == o.n &&
               ell == o.ell && mode == o.mode;
    }
};

}  // namespace otx
