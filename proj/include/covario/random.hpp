#pragma once

#include <array>
#include <cstdint>

namespace covario {

/// Philox4x32-10 counter-based generator. The stream id selects an
/// independent sequence for the same seed, so parallel work can draw
/// reproducibly without sharing state.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

    std::array<std::uint32_t, 4> block(std::uint64_t index) const noexcept;

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept;
    /// Standard normal (Box–Muller).
    double normal() noexcept;
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) noexcept;

private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<double, 2> buffer_{};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace covario
