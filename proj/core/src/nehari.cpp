#include "kcq/nehari.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "kcq/rng.hpp"

namespace kcq {

RayProjection project_ray(const FiberCoeffs& c, double tol) {
    if (!(c.A > 0.0)) throw std::invalid_argument("project_ray: zero field (A = 0)");
    if (!(c.D > 0.0)) throw std::invalid_argument("project_ray: degenerate convolution term (D <= 0)");
    if (!(c.p > 2.0)) throw std::invalid_argument("project_ray: requires p > 2");
    if (!(tol > 0.0)) throw std::invalid_argument("project_ray: tol must be positive");

    const double A = c.A, B = c.B, D = c.D, p = c.p;
    const auto g = [&](double sig) { return A + B * sig - D * std::pow(sig, p - 1.0); };
    const auto gp = [&](double sig) { return B - D * (p - 1.0) * std::pow(sig, p - 2.0); };

    // g is maximal at sigma_c; to its right g decreases to -infinity, so
    // doubling from there brackets the unique root.
    double lo = B > 0.0 ? std::pow(B / (D * (p - 1.0)), 1.0 / (p - 2.0)) : 0.0;
    double hi = std::max(lo, std::pow(A / D, 1.0 / (p - 1.0)));
    while (g(hi) > 0.0) {
        hi *= 2.0;
        if (!std::isfinite(hi)) throw std::runtime_error("project_ray: bracket search overflow");
    }
    const std::pair<double, double> bracket{lo, hi};

    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    double sig = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        const double gv = g(sig);
        if (std::abs(gv) <= tol * A) break;
        const double gd = gp(sig);
        if (gd == 0.0) break;
        const double next = sig - gv / gd;
        if (!(next > bracket.first) || !(next <= bracket.second) || !std::isfinite(next)) break;
        sig = next;
    }

    RayProjection out;
    out.s_star = std::sqrt(sig);
    out.fiber_residual = std::abs(g(sig));
    out.bracket = bracket;
    return out;
}

namespace {

double pow_abs(double x, double e) {
    const double a = std::abs(x);
    return a == 0.0 ? 0.0 : std::pow(a, e);
}

// Sum of the absolute gradient monomials: the rounding floor |grad f| can
// reach is a small multiple of eps times this.
double grad_scale(const SignCoeffs& c, double s, double t) {
    const double s2 = s * s, t2 = t * t;
    double acc = 0.0;
    acc += std::abs(s * c.Aplus) + std::abs(c.b * s * s2 * c.Gplus * c.Gplus) +
           pow_abs(s, 2.0 * c.p - 1.0) * c.Dplus + std::abs(0.5 * c.a * t * c.K) +
           std::abs(0.5 * c.b * s * t2 * c.K * c.K) + std::abs(c.b * s * t2 * c.Gplus * c.Gminus) +
           std::abs(0.5 * c.b * t * c.K) * (3.0 * s2 * c.Gplus + t2 * c.Gminus) +
           pow_abs(s, c.p - 1.0) * pow_abs(t, c.p) * std::abs(c.E);
    acc += std::abs(t * c.Aminus) + std::abs(c.b * t * t2 * c.Gminus * c.Gminus) +
           pow_abs(t, 2.0 * c.p - 1.0) * c.Dminus + std::abs(0.5 * c.a * s * c.K) +
           std::abs(0.5 * c.b * s2 * t * c.K * c.K) + std::abs(c.b * s2 * t * c.Gplus * c.Gminus) +
           std::abs(0.5 * c.b * s * c.K) * (s2 * c.Gplus + 3.0 * t2 * c.Gminus) +
           pow_abs(s, c.p) * pow_abs(t, c.p - 1.0) * std::abs(c.E);
    return acc;
}

}  // namespace

PairProjection project_pair(const SignCoeffs& c, double tol, std::uint64_t grid_seed) {
    if (!(c.p > 4.0)) {
        throw std::invalid_argument("project_pair: requires p > 4 (no uniqueness below)");
    }
    if (!(c.Aplus > 0.0) || !(c.Aminus > 0.0)) {
        throw std::invalid_argument("project_pair: one-signed field");
    }
    if (!(c.Dplus > 0.0) || !(c.Dminus > 0.0)) {
        throw std::invalid_argument("project_pair: degenerate convolution term");
    }

    // Coarse 16x16 log grid spanning two decades around the single-ray roots
    // (A/D)^{1/(2p-2)} of each sign; scale covariance puts the maximizer in
    // this window whatever the field amplitudes are. The jitter perturbs node
    // positions but never the winner rule.
    constexpr int kGrid = 16;
    const double s_scale = std::log(std::pow(c.Aplus / c.Dplus, 1.0 / (2.0 * c.p - 2.0)));
    const double t_scale = std::log(std::pow(c.Aminus / c.Dminus, 1.0 / (2.0 * c.p - 2.0)));
    const double half_span = std::log(1e2);
    Rng rng(grid_seed);
    double best_f = -std::numeric_limits<double>::infinity();
    double s = std::exp(s_scale), t = std::exp(t_scale);
    for (int i = 0; i < kGrid; ++i) {
        for (int j = 0; j < kGrid; ++j) {
            double ls = s_scale - half_span + 2.0 * half_span * (i + 0.5) / kGrid;
            double lt = t_scale - half_span + 2.0 * half_span * (j + 0.5) / kGrid;
            if (grid_seed != 0) {
                ls += (rng.uniform() - 0.5) * 2.0 * half_span / kGrid;
                lt += (rng.uniform() - 0.5) * 2.0 * half_span / kGrid;
            }
            const double fs = f_eval(c, std::exp(ls), std::exp(lt));
            if (fs > best_f) {
                best_f = fs;
                s = std::exp(ls);
                t = std::exp(lt);
            }
        }
    }

    double gnorm = 0.0;
    for (int it = 0; it < 500; ++it) {
        const auto [fs, ft] = f_grad(c, s, t);
        gnorm = std::hypot(fs, ft);
        if (gnorm <= tol || gnorm <= 4e-15 * grad_scale(c, s, t)) break;
        const auto [fss, fst, ftt] = f_hess(c, s, t);
        const double det = fss * ftt - fst * fst;
        double ds, dt;
        bool newton = false;
        if (det > 0.0 && fss < 0.0) {
            // Newton step toward the stationary point of the concave model
            ds = -(ftt * fs - fst * ft) / det;
            dt = -(-fst * fs + fss * ft) / det;
            newton = true;
        } else {
            // uphill fallback, scaled to the current point
            const double n = std::max(gnorm, 1e-300);
            ds = fs / n * 0.1 * s;
            dt = ft / n * 0.1 * t;
        }
        if (newton && std::abs(ds) <= 0.5 * s && std::abs(dt) <= 0.5 * t) {
            // short Newton steps near the maximizer are quadratically
            // convergent; a line search on f would drown in rounding there
            s += ds;
            t += dt;
            continue;
        }
        const double f0 = f_eval(c, s, t);
        double lam = 1.0;
        while (lam > 1e-14) {
            const double s2 = s + lam * ds, t2 = t + lam * dt;
            if (s2 > 0.0 && t2 > 0.0 && f_eval(c, s2, t2) >= f0) break;
            lam *= 0.5;
        }
        s = std::max(s + lam * ds, 1e-14);
        t = std::max(t + lam * dt, 1e-14);
    }

    const auto [fs, ft] = f_grad(c, s, t);
    gnorm = std::hypot(fs, ft);
    if (!(gnorm <= std::max(tol, 1e-13 * grad_scale(c, s, t)))) {
        throw std::runtime_error("project_pair: did not reach requested gradient tolerance");
    }
    const auto [fss, fst, ftt] = f_hess(c, s, t);

    PairProjection out;
    out.s_u = s;
    out.t_u = t;
    out.grad_norm = gnorm;
    out.hessian_definite = fss < 0.0 && fss * ftt - fst * fst > 0.0;
    return out;
}

PairProjection project_pair_multistart(const SignCoeffs& c, double tol, int starts) {
    PairProjection best;
    bool have = false;
    for (int k = 0; k < starts; ++k) {
        const PairProjection cand = project_pair(c, tol, static_cast<std::uint64_t>(k));
        const bool better =
            !have || cand.grad_norm < best.grad_norm ||
            (cand.grad_norm == best.grad_norm &&
             std::pair{cand.s_u, cand.t_u} < std::pair{best.s_u, best.t_u});
        if (better) {
            best = cand;
            have = true;
        }
    }
    return best;
}

}  // namespace kcq
