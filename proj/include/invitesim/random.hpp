#pragma once

#include <cstdint>
#include <random>

namespace invitesim {

/// Seeded stream. Identical (seed, stream) pairs reproduce identical draws.
/// Uses mt19937_64 (fully specified by the standard) with hand-written
/// transforms so results do not depend on the library's distribution classes.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream = 0);

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream() const noexcept { return stream_; }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform on (0, 1].
    double uniform_open0() noexcept { return 1.0 - uniform(); }
    double exponential(double rate) noexcept;
    double normal() noexcept;
    bool bernoulli(double p) noexcept { return uniform() < p; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace invitesim
