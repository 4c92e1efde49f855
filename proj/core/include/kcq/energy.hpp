// The variational core: equation constants, potential families, the H-norm,
// the energy functional J, its derivative pairing, and the coefficient
// records that reduce ray/pair analysis to scalar polynomials.
#pragma once

#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "kcq/green.hpp"
#include "kcq/lattice.hpp"

namespace kcq {

/// Equation constants of -(a + b int |grad u|^2) Delta u + h u = (R_a * |u|^p)|u|^{p-2}u.
struct Params {
    double a = 1.0;
    double b = 1.0;
    double p = 3.0;
    double alpha = 2.0;

    void validate() const;
    /// Sign-changing machinery additionally needs p > 4.
    void validate_sign_changing() const;
};

/// Potential h(x): constant, tau-periodic with a supplied cell, or coercive
/// h0 + slope * |x - center|_1. All variants are bounded below by a positive h0.
class PotentialSpec {
public:
    struct Constant {
        double h0 = 1.0;
    };
    struct Periodic {
        int tau = 1;
        std::vector<double> cell;  // tau^3 values, k-fastest order
    };
    struct Coercive {
        double h0 = 1.0;
        double slope = 1.0;
        Coord center{0, 0, 0};
    };

    static PotentialSpec constant(double h0);
    static PotentialSpec periodic(int tau, std::vector<double> cell);
    static PotentialSpec coercive(double h0, double slope, Coord center);

    double operator()(const Coord& x) const;
    /// The uniform lower bound h0.
    double floor() const { return floor_; }

    const std::variant<Constant, Periodic, Coercive>& variant() const { return v_; }

private:
    std::variant<Constant, Periodic, Coercive> v_{Constant{}};
    double floor_ = 1.0;
};

double h_eval(const PotentialSpec& spec, const Coord& x);

/// ||u||^2 = int (a |grad u|^2 + h(x) u^2).
double h_norm_sq(const Params& P, const PotentialSpec& spec, const BoxDomain& dom, const Field& u);

/// J(u) = 1/2 ||u||^2 + b/4 (int |grad u|^2)^2 - 1/(2p) int (R_a*|u|^p)|u|^p.
double energy_J(const Params& P, const PotentialSpec& spec, const KernelTable& ker,
                const BoxDomain& dom, const Field& u);

/// Euler-Lagrange defect G(x) = -(a + b int|grad u|^2) Delta u + h u -
/// (R_a*|u|^p)|u|^{p-2}u.  Satisfies sum G(x) phi(x) = (J'(u), phi) for phi
/// supported in the box.
Field residual_EL(const Params& P, const PotentialSpec& spec, const KernelTable& ker,
                  const BoxDomain& dom, const Field& u);

/// (J'(u), phi) evaluated through the Euler-Lagrange field.
double pairing_J_prime(const Params& P, const PotentialSpec& spec, const KernelTable& ker,
                       const BoxDomain& dom, const Field& u, const Field& phi);

/// Coefficients of the fiber polynomial (J'(su), su) = s^2 A + s^4 B - s^{2p} D.
struct FiberCoeffs {
    double A = 0.0;  // ||u||^2
    double B = 0.0;  // b (int |grad u|^2)^2
    double D = 0.0;  // int (R_a*|u|^p)|u|^p
    double p = 3.0;

    double fiber_value(double s) const;  // (J'(su), su)
    double energy_along(double s) const; // J(su)
};

FiberCoeffs fiber_coeffs(const Params& P, const PotentialSpec& spec, const KernelTable& ker,
                         const BoxDomain& dom, const Field& u);

/// The nine scalars that determine f(s,t) = J(s u+ + t u-) exactly.
struct SignCoeffs {
    double a = 0.0, b = 0.0, p = 0.0;
    double Aplus = 0.0, Aminus = 0.0;   // ||u+-||^2
    double Gplus = 0.0, Gminus = 0.0;   // int |grad u+-|^2
    double Dplus = 0.0, Dminus = 0.0;   // int (R_a*|u+-|^p)|u+-|^p
    double E = 0.0;                     // int (R_a*|u+|^p)|u-|^p
    double K = 0.0;                     // K_V(u) <= 0
};

SignCoeffs sign_coeffs(const Params& P, const PotentialSpec& spec, const KernelTable& ker,
                       const BoxDomain& dom, const Field& u);

double f_eval(const SignCoeffs& c, double s, double t);
/// (f_s, f_t); s f_s(s,t) = (J'(su+ + tu-), su+), t f_t likewise.
std::array<double, 2> f_grad(const SignCoeffs& c, double s, double t);
/// (f_ss, f_st, f_tt).
std::array<double, 3> f_hess(const SignCoeffs& c, double s, double t);

/// Relative residuals of the exact decomposition identities at scales (s, t):
/// the Dirichlet-energy splitting with the K_V cross term (three forms), the
/// energy/pairing decompositions of J(su+ + tu-), the alternative pairing
/// formula at s = t = 1, and the discrete-vs-continuous gap equality.
struct DecompositionReport {
    double grad_split = 0.0;        // |grad(su+ + tu-)|^2 splitting
    double grad_pair_plus = 0.0;    // mixed form against su+
    double grad_pair_minus = 0.0;   // mixed form against tu-
    double energy_split = 0.0;      // J(su+ + tu-) decomposition
    double pairing_plus = 0.0;      // (J'(su+ + tu-), su+) decomposition
    double pairing_minus = 0.0;     // (J'(su+ + tu-), tu-) decomposition
    double pairing_alt_plus = 0.0;  // alternative formula for (J'(u), u+)
    double pairing_alt_minus = 0.0; // alternative formula for (J'(u), u-)
    double gap_identity = 0.0;      // naive splitting misses exactly the K_V terms

    double max_residual() const;
};

DecompositionReport decomposition_check(const Params& P, const PotentialSpec& spec,
                                        const KernelTable& ker, const BoxDomain& dom,
                                        const Field& u, double s, double t);

}  // namespace kcq
