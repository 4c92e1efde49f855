// Projections onto the Nehari set (scalar fiber root along a ray) and onto
// the sign-changing Nehari set (positive maximizer pair of f(s,t)).
#pragma once

#include <cstdint>
#include <utility>

#include "kcq/energy.hpp"

namespace kcq {

struct RayProjection {
    double s_star = 0.0;
    double fiber_residual = 0.0;          // |(J'(su), su)| at s_star
    std::pair<double, double> bracket{0.0, 0.0};  // bracket in sigma = s^2
};

/// Unique s > 0 with (J'(su), su) = 0. In sigma = s^2 the condition reads
/// g(sigma) = A + B sigma - D sigma^{p-1} = 0; g rises from g(0) = A > 0 to a
/// single maximum and then falls to -infinity, so the positive root is unique.
/// Solved by bracketed bisection plus a Newton polish; |g| <= tol * A on exit.
/// Throws when A == 0 (zero field) or D <= 0 (degenerate convolution term).
RayProjection project_ray(const FiberCoeffs& c, double tol = 1e-14);

struct PairProjection {
    double s_u = 0.0;
    double t_u = 0.0;
    double grad_norm = 0.0;        // ||grad f(s_u, t_u)||
    bool hessian_definite = false; // numerically negative definite at the pair
};

/// The positive pair maximizing f(s,t) = J(s u+ + t u-), requires p > 4.
/// Coarse log-spaced grid scan (jittered when grid_seed != 0), then a
/// safeguarded Newton ascent on grad f = 0 with the closed-form Hessian.
/// On exit ||grad f|| <= tol and f(s_u,t_u) dominates the scan grid.
PairProjection project_pair(const SignCoeffs& c, double tol = 1e-10,
                            std::uint64_t grid_seed = 0);

/// Winner over several jittered starts: lowest grad_norm, ties broken by
/// lexicographic (s, t).
PairProjection project_pair_multistart(const SignCoeffs& c, double tol = 1e-10,
                                       int starts = 10);

}  // namespace kcq
