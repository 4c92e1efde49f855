// Projected-gradient minimization of J over the Nehari set (ground states)
// and over the sign-changing Nehari set, with Euler-Lagrange certification.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "kcq/energy.hpp"
#include "kcq/nehari.hpp"

namespace kcq {

struct SolveConfig {
    int max_iters = 5000;
    double step0 = 1.0;            // initial gradient step
    double backtrack = 0.5;        // step shrink factor in (0,1)
    double armijo = 1e-4;          // sufficient-decrease constant
    double tol_residual = 1e-6;    // relative Euler-Lagrange residual target
    double tol_nehari = 1e-8;      // |(J'(u), u or u+-)| <= tol_nehari * ||u||^2
    std::uint64_t rng_seed = 1;

    enum class Init {
        positive_bump,    // Gaussian bump at the box center
        sign_bump,        // dipole: positive bump and mirrored negative bump
        random_positive,  // positive_bump with seeded multiplicative jitter
        random_sign,      // sign_bump with seeded multiplicative jitter
        from_field,       // caller-supplied init_field
    };
    Init init = Init::positive_bump;
    double bump_width = 4.0;
    Field init_field;

    int reseed_cap = 5;  // sign-death re-seeds tolerated by the sign-changing loop

    void validate() const;
};

struct SolveReport {
    double energy = 0.0;                   // J at the final iterate (estimate of c or m)
    double residual_rel = 0.0;             // ||G||_2 / max(1, ||u||_2)
    std::vector<double> nehari_residuals;  // one entry for ground, two for sign-changing
    int iterations = 0;
    std::vector<double> energy_trace;      // J after every accepted projection step
    std::vector<double> residual_trace;    // relative EL residual of the same iterates
    std::pair<std::int64_t, std::int64_t> sign_counts{0, 0};
    bool converged = false;
    int reseeds = 0;
    std::string stop_reason;
};

/// Build the initial field a config describes on a given box.
Field make_init(const BoxDomain& dom, const SolveConfig& cfg);

/// Ground state: repeat { project onto the Nehari set along the current ray;
/// take an Armijo-backtracked step against the Euler-Lagrange field }.
/// The output carries sum u >= 0 (J is even, so the sign is a convention).
std::pair<Field, SolveReport> solve_ground(const Params& P, const PotentialSpec& spec,
                                           const KernelTable& ker, const BoxDomain& dom,
                                           const SolveConfig& cfg);

/// Sign-changing ground state via the pair projection; requires p > 4 and an
/// init with both signs. A sign that dies mid-iteration is re-seeded from the
/// initial pattern, up to cfg.reseed_cap times.
std::pair<Field, SolveReport> solve_sign_changing(const Params& P, const PotentialSpec& spec,
                                                  const KernelTable& ker, const BoxDomain& dom,
                                                  const SolveConfig& cfg);

/// ||residual_EL(u)||_2 / max(1, ||u||_2).
double residual(const Params& P, const PotentialSpec& spec, const KernelTable& ker,
                const BoxDomain& dom, const Field& u);

struct FiberSample {
    double s = 0.0;
    double energy = 0.0;   // J(su)
    double pairing = 0.0;  // (J'(su), su)
};

/// Sample the fiber map along the ray through u.
std::vector<FiberSample> fiber_curve(const Params& P, const PotentialSpec& spec,
                                     const KernelTable& ker, const BoxDomain& dom, const Field& u,
                                     const std::vector<double>& s_grid);

}  // namespace kcq
