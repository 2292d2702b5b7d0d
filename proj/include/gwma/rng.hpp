#pragma once

#include <array>
#include <cstdint>

#include "gwma/normal.hpp"

namespace gwma {

/// RNG identifier written into result metadata. Normal variates come from
/// the inverse CDF applied to one 64-bit Philox draw per observation.
inline constexpr const char* kRngId = "philox4x32-10/inverse-cdf";

namespace rng {

/// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
/// Stateless: output is a pure function of (counter, key), which is what
/// makes replicate streams independent of scheduling.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        round_once(ctr, key);
        for (int r = 1; r < 10; ++r) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
            round_once(ctr, key);
        }
        return ctr;
    }

private:
    static void round_once(std::array<std::uint32_t, 4>& c,
                           const std::array<std::uint32_t, 2>& k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

} // namespace rng

/// Random-number stream for one simulation replicate. Draw t is addressed
/// by the observation index, so two runs that consume different prefixes of
/// a replicate still see identical values at identical times (common random
/// numbers across change points and designs).
class ReplicateStream {
public:
    ReplicateStream(std::uint64_t seed, std::uint64_t replicate)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          rep_lo_(static_cast<std::uint32_t>(replicate)),
          rep_hi_(static_cast<std::uint32_t>(replicate >> 32)) {}

    /// 64 uniform bits for observation index t (t >= 1).
    std::uint64_t bits_at(std::uint64_t t) const {
        const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(t),
                                               static_cast<std::uint32_t>(t >> 32),
                                               rep_lo_, rep_hi_};
        const auto out = rng::Philox4x32::block(ctr, key_);
        return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    }

    /// Uniform draw in the open interval (0, 1): (k + 1/2) * 2^-53.
    double uniform_at(std::uint64_t t) const {
        return (static_cast<double>(bits_at(t) >> 11) + 0.5) * 0x1p-53;
    }

    /// Standard normal draw for observation index t.
    double normal_at(std::uint64_t t) const { return norm_ppf(uniform_at(t)); }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t rep_lo_;
    std::uint32_t rep_hi_;
};

} // namespace gwma
