#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace ndo {

// Counter-based Philox4x32-10 generator (Salmon et al. 2011). A 64-bit seed is
// the key; the block counter advances by one per 4 outputs. Counter-based
// means trajectories are reproducible across platforms and trivially
// parallel: no hidden state beyond (seed, counter).
class Philox {
  public:
    explicit Philox(std::uint64_t seed) : key_{static_cast<std::uint32_t>(seed),
                                               static_cast<std::uint32_t>(seed >> 32)} {}

    // Next raw 32-bit draw.
    std::uint32_t next_u32();

    // Uniform on (0, 1]: (x + 1) * 2^-32 — never 0, so log() below is safe.
    double next_uniform();

    // Standard normal via Box-Muller; draws are produced in pairs.
    double next_normal();

    // Complex Wiener increment for a step dt: sqrt(dt/2) * (z0 + i z1), so that
    // E[dxi conj(dxi)] = dt and E[dxi^2] = 0.
    std::complex<double> next_wiener(double dt);

    static std::array<std::uint32_t, 4> block(const std::array<std::uint32_t, 2>& key,
                                              const std::array<std::uint32_t, 4>& counter);

  private:
    std::array<std::uint32_t, 2> key_;
    std::uint64_t block_index_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffer_pos_ = 4;  // empty
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace ndo
