#pragma once

// Counter-based random streams. Every value is a pure function of
// (seed, stream, position), so trials replay independently of thread
// scheduling and of how many values other trials consumed.

#include <array>
#include <cstdint>
#include <string_view>

#include "disscalc/common.hpp"

namespace disscalc {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

class PhiloxStream {
public:
    /// Bumped whenever the mapping from (seed, stream) to values changes.
    static constexpr std::string_view kVersion = "philox4x32-10/u53/box-muller/v1";

    PhiloxStream(std::uint64_t seed, std::uint64_t stream) noexcept;

    std::array<std::uint32_t, 4> next_block() noexcept;
    /// Uniform on (0, 1), 53 random bits, never 0 or 1.
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    double normal() noexcept;
    /// Standard complex Gaussian: E|z|^2 = 1.
    Complex complex_normal() noexcept;

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t position_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;

    std::uint32_t next_word() noexcept;
};

/// Stream id for (trial, purpose); purposes keep draws for different
/// matrices of one trial independent.
constexpr std::uint64_t trial_stream(std::uint64_t trial, std::uint32_t purpose) noexcept {
    return (trial << 8) | purpose;
}

}  // namespace disscalc
