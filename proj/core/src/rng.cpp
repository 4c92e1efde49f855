#include "kcq/rng.hpp"

namespace kcq {

Field random_field(const BoxDomain& dom, Rng& rng, double lo, double hi) {
    Field u(dom);
    for (double& v : u.values) v = rng.uniform(lo, hi);
    return u;
}

Field random_sign_changing_field(const BoxDomain& dom, Rng& rng) {
    Field u = random_field(dom, rng);
    bool pos = false, neg = false;
    for (double v : u.values) {
        pos = pos || v > 0.0;
        neg = neg || v < 0.0;
    }
    if (!pos) u.values.front() = rng.uniform(0.5, 1.0);
    if (!neg) u.values.back() = -rng.uniform(0.5, 1.0);
    return u;
}

Field random_smooth_field(const BoxDomain& dom, Rng& rng, int sweeps) {
    Field u = random_field(dom, rng);
    for (int s = 0; s < sweeps; ++s) {
        const Field lap = laplacian(dom, u);
        for (std::size_t n = 0; n < u.values.size(); ++n) {
            u.values[n] += 0.125 * lap.values[n];
        }
    }
    return u;
}

Field random_smooth_sign_changing_field(const BoxDomain& dom, Rng& rng, int sweeps) {
    Field u = random_smooth_field(dom, rng, sweeps);
    bool pos = false, neg = false;
    for (double v : u.values) {
        pos = pos || v > 0.0;
        neg = neg || v < 0.0;
    }
    if (!pos) u.values.front() = rng.uniform(0.5, 1.0);
    if (!neg) u.values.back() = -rng.uniform(0.5, 1.0);
    return u;
}

}  // namespace kcq
