#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace rmrce {

// Philox4x32-10 counter-based generator (Salmon et al.'s parameters:
// multipliers 0xD2511F53 / 0xCD9E8D57, Weyl keys 0x9E3779B9 / 0xBB67AE85,
// 10 rounds). Fully specified, so streams are identical across platforms;
// independent streams are obtained by seeding with distinct 64-bit keys.
class Philox4x32 {
  public:
    explicit Philox4x32(std::uint64_t seed) : key_{static_cast<std::uint32_t>(seed),
                                                   static_cast<std::uint32_t>(seed >> 32)} {}

    // One 4-word block for an explicit 128-bit counter.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = 0xD2511F53ULL * ctr[0];
            const std::uint64_t p1 = 0xCD9E8D57ULL * ctr[2];
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += 0x9E3779B9U;
            key[1] += 0xBB67AE85U;
        }
        return ctr;
    }

    std::uint32_t next_u32() {
        if (slot_ == 4) {
            buffer_ = block({static_cast<std::uint32_t>(counter_),
                             static_cast<std::uint32_t>(counter_ >> 32), 0U, 0U},
                            key_);
            ++counter_;
            slot_ = 0;
        }
        return buffer_[slot_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on (0, 1): 53 random bits shifted into the mantissa, then the
    // half-ulp offset keeps 0 out of the support.
    double next_u01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes two uniforms per pair.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_u01();
        const double u2 = next_u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Cauchy(0, scale) by inverse CDF.
    double next_cauchy(double scale) {
        return scale * std::tan(std::numbers::pi * (next_u01() - 0.5));
    }

    // Fisher-Yates permutation of 0..n-1.
    std::vector<int> permutation(int n) {
        std::vector<int> p(n);
        for (int i = 0; i < n; ++i) p[i] = i;
        for (int i = n - 1; i > 0; --i) {
            const int j = static_cast<int>(next_u64() % static_cast<std::uint64_t>(i + 1));
            std::swap(p[i], p[j]);
        }
        return p;
    }

  private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int slot_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Seed for the k-th independent task of a run.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t task_index) {
    return base_seed + task_index;
}

} // namespace rmrce
