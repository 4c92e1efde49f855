#include "kcq/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kcq {

namespace {

double pow_abs(double x, double e) {
    const double a = std::abs(x);
    return a == 0.0 ? 0.0 : std::pow(a, e);
}

// |u|^{q-1} u with the removable value 0 at u = 0.
double signed_pow(double u, double q) {
    if (u == 0.0) return 0.0;
    return u > 0.0 ? std::pow(u, q) : -std::pow(-u, q);
}

Field abs_pow_field(const Field& u, double p) {
    Field w(u.domain);
    for (std::size_t n = 0; n < u.values.size(); ++n) w.values[n] = pow_abs(u.values[n], p);
    return w;
}

Field scaled(const Field& u, double s) {
    Field w(u.domain);
    for (std::size_t n = 0; n < u.values.size(); ++n) w.values[n] = s * u.values[n];
    return w;
}

Field combine(const Field& up, double s, const Field& um, double t) {
    Field w(up.domain);
    for (std::size_t n = 0; n < up.values.size(); ++n)
        w.values[n] = s * up.values[n] + t * um.values[n];
    return w;
}

double rel_residual(double lhs, double rhs) {
    return std::abs(lhs - rhs) / (1.0 + std::abs(lhs));
}

}  // namespace

void Params::validate() const {
    if (!(a > 0.0)) throw std::invalid_argument("a must be positive");
    if (!(b > 0.0)) throw std::invalid_argument("b must be positive");
    if (!(p > 2.0)) throw std::invalid_argument("p must exceed 2");
    if (!(alpha > 0.0) || !(alpha < 3.0)) throw std::invalid_argument("alpha must lie in (0, 3)");
}

void Params::validate_sign_changing() const {
    validate();
    if (!(p > 4.0)) {
        throw std::invalid_argument("sign-changing projection requires p > 4");
    }
}

PotentialSpec PotentialSpec::constant(double h0) {
    if (!(h0 > 0.0)) throw std::invalid_argument("constant potential requires h0 > 0");
    PotentialSpec s;
    s.v_ = Constant{h0};
    s.floor_ = h0;
    return s;
}

PotentialSpec PotentialSpec::periodic(int tau, std::vector<double> cell) {
    if (tau < 1) throw std::invalid_argument("periodic potential requires tau >= 1");
    const std::size_t want = static_cast<std::size_t>(tau) * tau * tau;
    if (cell.size() != want) throw std::invalid_argument("periodic cell must hold tau^3 values");
    const double lo = *std::min_element(cell.begin(), cell.end());
    if (!(lo > 0.0)) throw std::invalid_argument("periodic cell entries must be positive");
    PotentialSpec s;
    s.v_ = Periodic{tau, std::move(cell)};
    s.floor_ = lo;
    return s;
}

PotentialSpec PotentialSpec::coercive(double h0, double slope, Coord center) {
    if (!(h0 > 0.0)) throw std::invalid_argument("coercive potential requires h0 > 0");
    if (!(slope > 0.0)) throw std::invalid_argument("coercive potential requires positive slope");
    PotentialSpec s;
    s.v_ = Coercive{h0, slope, center};
    s.floor_ = h0;
    return s;
}

double PotentialSpec::operator()(const Coord& x) const {
    if (const auto* c = std::get_if<Constant>(&v_)) return c->h0;
    if (const auto* p = std::get_if<Periodic>(&v_)) {
        const int tau = p->tau;
        int idx[3];
        for (int d = 0; d < 3; ++d) idx[d] = ((x[d] % tau) + tau) % tau;
        return p->cell[(static_cast<std::size_t>(idx[0]) * tau + idx[1]) * tau + idx[2]];
    }
    const auto& c = std::get<Coercive>(v_);
    const double l1 = std::abs(x[0] - c.center[0]) + std::abs(x[1] - c.center[1]) +
                      std::abs(x[2] - c.center[2]);
    return c.h0 + c.slope * l1;
}

double h_eval(const PotentialSpec& spec, const Coord& x) { return spec(x); }

double h_norm_sq(const Params& P, const PotentialSpec& spec, const BoxDomain& dom, const Field& u) {
    const double grad = dirichlet_energy(dom, u);
    double pot = 0.0;
    const std::int64_t N = dom.vertex_count();
    for (std::int64_t n = 0; n < N; ++n) {
        const double v = u.values[static_cast<std::size_t>(n)];
        pot += spec(dom.coord_of(n)) * v * v;
    }
    return P.a * grad + pot;
}

double energy_J(const Params& P, const PotentialSpec& spec, const KernelTable& ker,
                const BoxDomain& dom, const Field& u) {
    const double nsq = h_norm_sq(P, spec, dom, u);
    const double grad = dirichlet_energy(dom, u);
    const Field w = abs_pow_field(u, P.p);
    const double choq = choquard_pairing(ker, dom, w, w);
    return 0.5 * nsq + 0.25 * P.b * grad * grad - 0.5 / P.p * choq;
}

Field residual_EL(const Params& P, const PotentialSpec& spec, const KernelTable& ker,
                  const BoxDomain& dom, const Field& u) {
    const double grad = dirichlet_energy(dom, u);
    const Field lap = laplacian(dom, u);
    const Field conv = convolve_fft(ker, dom, abs_pow_field(u, P.p));
    Field out(dom);
    const double coeff = P.a + P.b * grad;
    const std::int64_t N = dom.vertex_count();
    for (std::int64_t n = 0; n < N; ++n) {
        const std::size_t i = static_cast<std::size_t>(n);
        out.values[i] = -coeff * lap.values[i] + spec(dom.coord_of(n)) * u.values[i] -
                        conv.values[i] * signed_pow(u.values[i], P.p - 1.0);
    }
    return out;
}

double pairing_J_prime(const Params& P, const PotentialSpec& spec, const KernelTable& ker,
                       const BoxDomain& dom, const Field& u, const Field& phi) {
    const Field g = residual_EL(P, spec, ker, dom, u);
    double acc = 0.0;
    for (std::size_t n = 0; n < g.values.size(); ++n) acc += g.values[n] * phi.values[n];
    return acc;
}

double FiberCoeffs::fiber_value(double s) const {
    return s * s * A + s * s * s * s * B - pow_abs(s, 2.0 * p) * D;
}

double FiberCoeffs::energy_along(double s) const {
    return 0.5 * s * s * A + 0.25 * s * s * s * s * B - 0.5 / p * pow_abs(s, 2.0 * p) * D;
}

FiberCoeffs fiber_coeffs(const Params& P, const PotentialSpec& spec, const KernelTable& ker,
                         const BoxDomain& dom, const Field& u) {
    FiberCoeffs c;
    c.p = P.p;
    c.A = h_norm_sq(P, spec, dom, u);
    if (c.A == 0.0) throw std::invalid_argument("fiber_coeffs requires a nonzero field");
    const double grad = dirichlet_energy(dom, u);
    c.B = P.b * grad * grad;
    const Field w = abs_pow_field(u, P.p);
    c.D = choquard_pairing(ker, dom, w, w);
    return c;
}

SignCoeffs sign_coeffs(const Params& P, const PotentialSpec& spec, const KernelTable& ker,
                       const BoxDomain& dom, const Field& u) {
    auto [up, um] = split_signs(u);
    SignCoeffs c;
    c.a = P.a;
    c.b = P.b;
    c.p = P.p;
    c.Aplus = h_norm_sq(P, spec, dom, up);
    c.Aminus = h_norm_sq(P, spec, dom, um);
    if (c.Aplus == 0.0 || c.Aminus == 0.0) {
        throw std::invalid_argument("sign_coeffs requires a sign-changing field");
    }
    c.Gplus = dirichlet_energy(dom, up);
    c.Gminus = dirichlet_energy(dom, um);
    const Field wp = abs_pow_field(up, P.p);
    const Field wm = abs_pow_field(um, P.p);
    c.Dplus = choquard_pairing(ker, dom, wp, wp);
    c.Dminus = choquard_pairing(ker, dom, wm, wm);
    c.E = choquard_pairing(ker, dom, wp, wm);
    c.K = k_v(dom, u);
    return c;
}

double f_eval(const SignCoeffs& c, double s, double t) {
    const double s2 = s * s, t2 = t * t;
    return 0.5 * s2 * c.Aplus + 0.25 * c.b * s2 * s2 * c.Gplus * c.Gplus -
           0.5 / c.p * pow_abs(s, 2.0 * c.p) * c.Dplus + 0.5 * t2 * c.Aminus +
           0.25 * c.b * t2 * t2 * c.Gminus * c.Gminus -
           0.5 / c.p * pow_abs(t, 2.0 * c.p) * c.Dminus - 0.5 * c.a * s * t * c.K +
           0.25 * c.b * s2 * t2 * c.K * c.K + 0.5 * c.b * s2 * t2 * c.Gplus * c.Gminus -
           0.5 * c.b * s * t * c.K * (s2 * c.Gplus + t2 * c.Gminus) -
           1.0 / c.p * pow_abs(s, c.p) * pow_abs(t, c.p) * c.E;
}

std::array<double, 2> f_grad(const SignCoeffs& c, double s, double t) {
    const double s2 = s * s, t2 = t * t;
    const double fs = s * c.Aplus + c.b * s * s2 * c.Gplus * c.Gplus -
                      pow_abs(s, 2.0 * c.p - 1.0) * c.Dplus - 0.5 * c.a * t * c.K +
                      0.5 * c.b * s * t2 * c.K * c.K + c.b * s * t2 * c.Gplus * c.Gminus -
                      0.5 * c.b * t * c.K * (3.0 * s2 * c.Gplus + t2 * c.Gminus) -
                      pow_abs(s, c.p - 1.0) * pow_abs(t, c.p) * c.E;
    const double ft = t * c.Aminus + c.b * t * t2 * c.Gminus * c.Gminus -
                      pow_abs(t, 2.0 * c.p - 1.0) * c.Dminus - 0.5 * c.a * s * c.K +
                      0.5 * c.b * s2 * t * c.K * c.K + c.b * s2 * t * c.Gplus * c.Gminus -
                      0.5 * c.b * s * c.K * (s2 * c.Gplus + 3.0 * t2 * c.Gminus) -
                      pow_abs(s, c.p) * pow_abs(t, c.p - 1.0) * c.E;
    return {fs, ft};
}

std::array<double, 3> f_hess(const SignCoeffs& c, double s, double t) {
    const double s2 = s * s, t2 = t * t;
    const double fss = c.Aplus + 3.0 * c.b * s2 * c.Gplus * c.Gplus -
                       (2.0 * c.p - 1.0) * pow_abs(s, 2.0 * c.p - 2.0) * c.Dplus +
                       0.5 * c.b * t2 * c.K * c.K + c.b * t2 * c.Gplus * c.Gminus -
                       3.0 * c.b * s * t * c.K * c.Gplus -
                       (c.p - 1.0) * pow_abs(s, c.p - 2.0) * pow_abs(t, c.p) * c.E;
    const double ftt = c.Aminus + 3.0 * c.b * t2 * c.Gminus * c.Gminus -
                       (2.0 * c.p - 1.0) * pow_abs(t, 2.0 * c.p - 2.0) * c.Dminus +
                       0.5 * c.b * s2 * c.K * c.K + c.b * s2 * c.Gplus * c.Gminus -
                       3.0 * c.b * s * t * c.K * c.Gminus -
                       (c.p - 1.0) * pow_abs(s, c.p) * pow_abs(t, c.p - 2.0) * c.E;
    const double fst = -0.5 * c.a * c.K + c.b * s * t * c.K * c.K +
                       2.0 * c.b * s * t * c.Gplus * c.Gminus -
                       1.5 * c.b * c.K * (s2 * c.Gplus + t2 * c.Gminus) -
                       c.p * pow_abs(s, c.p - 1.0) * pow_abs(t, c.p - 1.0) * c.E;
    return {fss, fst, ftt};
}

double DecompositionReport::max_residual() const {
    return std::max({grad_split, grad_pair_plus, grad_pair_minus, energy_split, pairing_plus,
                     pairing_minus, pairing_alt_plus, pairing_alt_minus, gap_identity});
}

DecompositionReport decomposition_check(const Params& P, const PotentialSpec& spec,
                                        const KernelTable& ker, const BoxDomain& dom,
                                        const Field& u, double s, double t) {
    auto [up, um] = split_signs(u);
    const SignCoeffs c = sign_coeffs(P, spec, ker, dom, u);
    const Field sup = scaled(up, s);
    const Field tum = scaled(um, t);
    const Field w = combine(up, s, um, t);

    DecompositionReport rep;

    // Dirichlet-energy splitting and the two mixed forms.
    {
        const double lhs = dirichlet_energy(dom, w);
        const double rhs = s * s * c.Gplus + t * t * c.Gminus - s * t * c.K;
        rep.grad_split = rel_residual(lhs, rhs);
    }
    {
        const double lhs = gamma_total(dom, w, sup);
        const double rhs = s * s * c.Gplus - 0.5 * s * t * c.K;
        rep.grad_pair_plus = rel_residual(lhs, rhs);
    }
    {
        const double lhs = gamma_total(dom, w, tum);
        const double rhs = t * t * c.Gminus - 0.5 * s * t * c.K;
        rep.grad_pair_minus = rel_residual(lhs, rhs);
    }

    // Energy decomposition: J(su+ + tu-) against separate energies plus the
    // K_V correction block and the convolution cross term.
    {
        const double lhs = energy_J(P, spec, ker, dom, w);
        const double sG = s * s * c.Gplus, tG = t * t * c.Gminus;
        const double rhs = energy_J(P, spec, ker, dom, sup) + energy_J(P, spec, ker, dom, tum) -
                           0.5 * P.a * s * t * c.K + 0.25 * P.b * s * s * t * t * c.K * c.K +
                           0.5 * P.b * sG * tG - 0.5 * P.b * s * t * c.K * (sG + tG) -
                           1.0 / P.p * pow_abs(s, P.p) * pow_abs(t, P.p) * c.E;
        rep.energy_split = rel_residual(lhs, rhs);
    }

    // Pairing decompositions, each against the direct Euler-Lagrange route.
    {
        const double lhs = pairing_J_prime(P, spec, ker, dom, w, sup);
        const double sG = s * s * c.Gplus, tG = t * t * c.Gminus;
        const double ray = s * s * c.Aplus + P.b * pow_abs(s, 4.0) * c.Gplus * c.Gplus -
                           pow_abs(s, 2.0 * P.p) * c.Dplus;  // (J'(su+), su+)
        const double rhs = ray - 0.5 * P.a * s * t * c.K + 0.5 * P.b * s * s * t * t * c.K * c.K +
                           P.b * sG * tG - 0.5 * P.b * s * t * c.K * (sG + tG) -
                           P.b * s * t * c.K * sG -
                           pow_abs(s, P.p) * pow_abs(t, P.p) * c.E;
        rep.pairing_plus = rel_residual(lhs, rhs);
    }
    {
        const double lhs = pairing_J_prime(P, spec, ker, dom, w, tum);
        const double sG = s * s * c.Gplus, tG = t * t * c.Gminus;
        const double ray = t * t * c.Aminus + P.b * pow_abs(t, 4.0) * c.Gminus * c.Gminus -
                           pow_abs(t, 2.0 * P.p) * c.Dminus;
        const double rhs = ray - 0.5 * P.a * s * t * c.K + 0.5 * P.b * s * s * t * t * c.K * c.K +
                           P.b * sG * tG - 0.5 * P.b * s * t * c.K * (sG + tG) -
                           P.b * s * t * c.K * tG -
                           pow_abs(s, P.p) * pow_abs(t, P.p) * c.E;
        rep.pairing_minus = rel_residual(lhs, rhs);
    }

    // Alternative pairing formula at s = t = 1 through the full-field
    // convolution int (R_a*|u|^p)|u+-|^p.
    {
        const Field wfull = abs_pow_field(u, P.p);
        const Field wp = abs_pow_field(up, P.p);
        const Field wm = abs_pow_field(um, P.p);
        const double grad_u = dirichlet_energy(dom, u);
        const double lhs_p = pairing_J_prime(P, spec, ker, dom, u, up);
        const double rhs_p = c.Aplus + P.b * grad_u * (c.Gplus - 0.5 * c.K) - 0.5 * P.a * c.K -
                             choquard_pairing(ker, dom, wfull, wp);
        rep.pairing_alt_plus = rel_residual(lhs_p, rhs_p);
        const double lhs_m = pairing_J_prime(P, spec, ker, dom, u, um);
        const double rhs_m = c.Aminus + P.b * grad_u * (c.Gminus - 0.5 * c.K) - 0.5 * P.a * c.K -
                             choquard_pairing(ker, dom, wfull, wm);
        rep.pairing_alt_minus = rel_residual(lhs_m, rhs_m);
    }

    // The naive (continuum) splitting of J(u) differs from the truth by
    // exactly the K_V block.
    {
        const double naive = energy_J(P, spec, ker, dom, up) + energy_J(P, spec, ker, dom, um) +
                             0.5 * P.b * c.Gplus * c.Gminus - 1.0 / P.p * c.E;
        const double gap = energy_J(P, spec, ker, dom, u) - naive;
        const double kblock = -0.5 * P.a * c.K + 0.25 * P.b * c.K * c.K -
                              0.5 * P.b * c.K * (c.Gplus + c.Gminus);
        rep.gap_identity = rel_residual(gap, kblock);
    }

    return rep;
}

}  // namespace kcq
