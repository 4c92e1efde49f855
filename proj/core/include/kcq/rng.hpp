// Deterministic seeded RNG used everywhere randomness appears, so runs are
// reproducible bit-for-bit for a given build.
#pragma once

#include <cstdint>

#include "kcq/lattice.hpp"

namespace kcq {

/// splitmix64 stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d649bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    std::uint64_t state_;
};

/// Field with i.i.d. uniform entries in [lo, hi).
Field random_field(const BoxDomain& dom, Rng& rng, double lo = -1.0, double hi = 1.0);

/// Uniform field conditioned to carry both signs.
Field random_sign_changing_field(const BoxDomain& dom, Rng& rng);

/// Random field passed through a few Jacobi smoothing sweeps; its gradient
/// energy is comparable with its mass, like the fields a solve produces.
Field random_smooth_field(const BoxDomain& dom, Rng& rng, int sweeps = 3);

/// Smooth random field conditioned to carry both signs.
Field random_smooth_sign_changing_field(const BoxDomain& dom, Rng& rng, int sweeps = 3);

}  // namespace kcq
