#include "kcq/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kcq {

namespace {

void require_same_domain(const BoxDomain& dom, const Field& u) {
    if (u.domain != dom || u.values.size() != static_cast<std::size_t>(dom.vertex_count())) {
        throw std::invalid_argument("field does not live on the given domain");
    }
}

}  // namespace

bool all_finite(const Field& u) {
    return std::all_of(u.values.begin(), u.values.end(),
                       [](double v) { return std::isfinite(v); });
}

Field laplacian(const BoxDomain& dom, const Field& u) {
    require_same_domain(dom, u);
    const int L = dom.side;
    const std::int64_t sx = static_cast<std::int64_t>(L) * L, sy = L, sz = 1;
    Field out(dom);
    std::int64_t n = 0;
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            for (int k = 0; k < L; ++k, ++n) {
                const double c = u.values[n];
                double acc = -6.0 * c;
                if (i > 0) acc += u.values[n - sx];
                if (i < L - 1) acc += u.values[n + sx];
                if (j > 0) acc += u.values[n - sy];
                if (j < L - 1) acc += u.values[n + sy];
                if (k > 0) acc += u.values[n - sz];
                if (k < L - 1) acc += u.values[n + sz];
                out.values[n] = acc;
            }
        }
    }
    return out;
}

Field gamma(const BoxDomain& dom, const Field& u, const Field& v) {
    require_same_domain(dom, u);
    require_same_domain(dom, v);
    const int L = dom.side;
    const std::int64_t sx = static_cast<std::int64_t>(L) * L, sy = L, sz = 1;
    Field out(dom);
    std::int64_t n = 0;
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            for (int k = 0; k < L; ++k, ++n) {
                const double uc = u.values[n], vc = v.values[n];
                double acc = 0.0;
                // each neighbor contributes (u(y)-u(x))(v(y)-v(x)); exterior y has value 0
                acc += ((i > 0 ? u.values[n - sx] : 0.0) - uc) * ((i > 0 ? v.values[n - sx] : 0.0) - vc);
                acc += ((i < L - 1 ? u.values[n + sx] : 0.0) - uc) * ((i < L - 1 ? v.values[n + sx] : 0.0) - vc);
                acc += ((j > 0 ? u.values[n - sy] : 0.0) - uc) * ((j > 0 ? v.values[n - sy] : 0.0) - vc);
                acc += ((j < L - 1 ? u.values[n + sy] : 0.0) - uc) * ((j < L - 1 ? v.values[n + sy] : 0.0) - vc);
                acc += ((k > 0 ? u.values[n - sz] : 0.0) - uc) * ((k > 0 ? v.values[n - sz] : 0.0) - vc);
                acc += ((k < L - 1 ? u.values[n + sz] : 0.0) - uc) * ((k < L - 1 ? v.values[n + sz] : 0.0) - vc);
                out.values[n] = 0.5 * acc;
            }
        }
    }
    return out;
}

Field gradient_norm_sq(const BoxDomain& dom, const Field& u) {
    return gamma(dom, u, u);
}

double gamma_total(const BoxDomain& dom, const Field& u, const Field& v) {
    require_same_domain(dom, u);
    require_same_domain(dom, v);
    const int L = dom.side;
    const std::int64_t sx = static_cast<std::int64_t>(L) * L, sy = L, sz = 1;
    // Every undirected edge touching the box exactly once: the +e_d edge from
    // each vertex (interior or leaving the box), plus the -e_d edge when that
    // neighbor is exterior.
    double acc = 0.0;
    std::int64_t n = 0;
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            for (int k = 0; k < L; ++k, ++n) {
                const double uc = u.values[n], vc = v.values[n];
                const double up_i = (i < L - 1) ? u.values[n + sx] : 0.0;
                const double vp_i = (i < L - 1) ? v.values[n + sx] : 0.0;
                acc += (up_i - uc) * (vp_i - vc);
                const double up_j = (j < L - 1) ? u.values[n + sy] : 0.0;
                const double vp_j = (j < L - 1) ? v.values[n + sy] : 0.0;
                acc += (up_j - uc) * (vp_j - vc);
                const double up_k = (k < L - 1) ? u.values[n + sz] : 0.0;
                const double vp_k = (k < L - 1) ? v.values[n + sz] : 0.0;
                acc += (up_k - uc) * (vp_k - vc);
                if (i == 0) acc += uc * vc;
                if (j == 0) acc += uc * vc;
                if (k == 0) acc += uc * vc;
            }
        }
    }
    return acc;
}

double dirichlet_energy(const BoxDomain& dom, const Field& u) {
    return gamma_total(dom, u, u);
}

std::pair<Field, Field> split_signs(const Field& u) {
    Field up(u.domain), um(u.domain);
    for (std::size_t n = 0; n < u.values.size(); ++n) {
        const double v = u.values[n];
        up.values[n] = v > 0.0 ? v : 0.0;
        um.values[n] = v < 0.0 ? v : 0.0;
    }
    return {std::move(up), std::move(um)};
}

double k_v(const BoxDomain& dom, const Field& u) {
    require_same_domain(dom, u);
    const int L = dom.side;
    const std::int64_t sx = static_cast<std::int64_t>(L) * L, sy = L, sz = 1;
    // Products u+(x)u-(y) vanish unless both endpoints are in the box, so only
    // interior edges contribute; each undirected edge counts twice (ordered pairs).
    double acc = 0.0;
    std::int64_t n = 0;
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            for (int k = 0; k < L; ++k, ++n) {
                const double c = u.values[n];
                const double cp = c > 0.0 ? c : 0.0;
                const double cm = c < 0.0 ? c : 0.0;
                if (i < L - 1) {
                    const double y = u.values[n + sx];
                    acc += cp * (y < 0.0 ? y : 0.0) + cm * (y > 0.0 ? y : 0.0);
                }
                if (j < L - 1) {
                    const double y = u.values[n + sy];
                    acc += cp * (y < 0.0 ? y : 0.0) + cm * (y > 0.0 ? y : 0.0);
                }
                if (k < L - 1) {
                    const double y = u.values[n + sz];
                    acc += cp * (y < 0.0 ? y : 0.0) + cm * (y > 0.0 ? y : 0.0);
                }
            }
        }
    }
    return 2.0 * acc;
}

double lp_norm(const Field& u, double q) {
    if (std::isinf(q)) {
        double m = 0.0;
        for (double v : u.values) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(q >= 1.0)) throw std::invalid_argument("lp_norm requires q >= 1");
    double acc = 0.0;
    for (double v : u.values) acc += std::pow(std::abs(v), q);
    return std::pow(acc, 1.0 / q);
}

}  // namespace kcq
