#include "kcq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kcq/rng.hpp"

namespace kcq {

namespace {

double norm2(const Field& u) {
    double acc = 0.0;
    for (double v : u.values) acc += v * v;
    return std::sqrt(acc);
}

double dot(const Field& u, const Field& v) {
    double acc = 0.0;
    for (std::size_t n = 0; n < u.values.size(); ++n) acc += u.values[n] * v.values[n];
    return acc;
}

Field gaussian_bump(const BoxDomain& dom, const std::array<double, 3>& center, double width) {
    Field u(dom);
    const std::int64_t N = dom.vertex_count();
    for (std::int64_t n = 0; n < N; ++n) {
        const Coord x = dom.coord_of(n);
        double r2 = 0.0;
        for (int d = 0; d < 3; ++d) {
            const double dx = x[d] - center[d];
            r2 += dx * dx;
        }
        u.values[static_cast<std::size_t>(n)] = std::exp(-0.5 * r2 / width);
    }
    return u;
}

void jitter(Field& u, std::uint64_t seed) {
    Rng rng(seed);
    for (double& v : u.values) v *= 1.0 + 0.2 * rng.uniform(-1.0, 1.0);
}

std::array<double, 3> box_center(const BoxDomain& dom) {
    const double c = (dom.side - 1) / 2.0;
    return {dom.origin[0] + c, dom.origin[1] + c, dom.origin[2] + c};
}

std::pair<std::int64_t, std::int64_t> count_signs(const Field& u) {
    std::int64_t pos = 0, neg = 0;
    for (double v : u.values) {
        if (v > 0.0) ++pos;
        if (v < 0.0) ++neg;
    }
    return {pos, neg};
}

}  // namespace

void SolveConfig::validate() const {
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (!(step0 > 0.0)) throw std::invalid_argument("step0 must be positive");
    if (!(backtrack > 0.0) || !(backtrack < 1.0)) throw std::invalid_argument("backtrack factor must lie in (0,1)");
    if (!(armijo > 0.0)) throw std::invalid_argument("armijo constant must be positive");
    if (!(tol_residual > 0.0) || !(tol_nehari > 0.0)) throw std::invalid_argument("tolerances must be positive");
    if (reseed_cap < 0) throw std::invalid_argument("reseed_cap must be >= 0");
}

Field make_init(const BoxDomain& dom, const SolveConfig& cfg) {
    const auto center = box_center(dom);
    const auto dipole = [&] {
        // positive bump shifted along +x, mirrored negative bump
        const double off = std::max(1.0, dom.side / 4.0);
        auto cp = center, cm = center;
        cp[0] += off;
        cm[0] -= off;
        const Field up = gaussian_bump(dom, cp, cfg.bump_width / 2.0);
        const Field um = gaussian_bump(dom, cm, cfg.bump_width / 2.0);
        Field u(dom);
        for (std::size_t n = 0; n < u.values.size(); ++n)
            u.values[n] = up.values[n] - um.values[n];
        return u;
    };
    switch (cfg.init) {
        case SolveConfig::Init::positive_bump:
            return gaussian_bump(dom, center, cfg.bump_width);
        case SolveConfig::Init::sign_bump:
            return dipole();
        case SolveConfig::Init::random_positive: {
            Field u = gaussian_bump(dom, center, cfg.bump_width);
            jitter(u, cfg.rng_seed);
            return u;
        }
        case SolveConfig::Init::random_sign: {
            Field u = dipole();
            jitter(u, cfg.rng_seed);
            return u;
        }
        case SolveConfig::Init::from_field:
            if (cfg.init_field.domain != dom) {
                throw std::invalid_argument("init field does not live on the solve domain");
            }
            return cfg.init_field;
    }
    throw std::logic_error("unreachable init kind");
}

double residual(const Params& P, const PotentialSpec& spec, const KernelTable& ker,
                const BoxDomain& dom, const Field& u) {
    return norm2(residual_EL(P, spec, ker, dom, u)) / std::max(1.0, norm2(u));
}

std::pair<Field, SolveReport> solve_ground(const Params& P, const PotentialSpec& spec,
                                           const KernelTable& ker, const BoxDomain& dom,
                                           const SolveConfig& cfg) {
    P.validate();
    cfg.validate();
    if (!ker.covers(dom)) throw std::invalid_argument("kernel does not cover the box");

    Field u = make_init(dom, cfg);
    if (norm2(u) == 0.0) throw std::invalid_argument("init field is identically zero");

    const auto project = [&](const Field& v) {
        const FiberCoeffs fc = fiber_coeffs(P, spec, ker, dom, v);
        const RayProjection rp = project_ray(fc, 1e-14);
        Field w(dom);
        for (std::size_t n = 0; n < v.values.size(); ++n) w.values[n] = rp.s_star * v.values[n];
        return w;
    };

    SolveReport rep;
    u = project(u);
    double Jcur = energy_J(P, spec, ker, dom, u);
    rep.energy_trace.push_back(Jcur);

    double step = cfg.step0;
    double res = 0.0, neh = 0.0;
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        const Field G = residual_EL(P, spec, ker, dom, u);
        const double gnorm2 = dot(G, G);
        res = std::sqrt(gnorm2) / std::max(1.0, norm2(u));
        neh = std::abs(dot(G, u)) / h_norm_sq(P, spec, dom, u);
        rep.residual_trace.push_back(res);
        if (res <= cfg.tol_residual && neh <= cfg.tol_nehari) {
            rep.converged = true;
            rep.stop_reason = "tolerances reached";
            break;
        }
        // Armijo backtracking on the projected energy: the ray projection puts
        // each trial back on the Nehari set before J is compared. Once the
        // requested decrease falls below the energy's rounding resolution the
        // comparison is noise; accept on strict residual descent instead.
        const double j_resolution = 1e-12 * (1.0 + std::abs(Jcur));
        bool accepted = false;
        Field w;
        double Jw = 0.0;
        while (step > 1e-18) {
            Field v(dom);
            for (std::size_t n = 0; n < u.values.size(); ++n)
                v.values[n] = u.values[n] - step * G.values[n];
            bool projectable = true;
            try {
                w = project(v);
            } catch (const std::invalid_argument&) {
                projectable = false;  // trial left the projectable cone; shrink
            }
            if (projectable) {
                Jw = energy_J(P, spec, ker, dom, w);
                if (Jw <= Jcur - cfg.armijo * step * gnorm2) {
                    accepted = true;
                    break;
                }
                if (cfg.armijo * step * gnorm2 <= j_resolution && Jw <= Jcur + 0.1 * j_resolution) {
                    const Field Gw = residual_EL(P, spec, ker, dom, w);
                    if (dot(Gw, Gw) < gnorm2) {
                        accepted = true;
                        break;
                    }
                }
            }
            step *= cfg.backtrack;
        }
        if (!accepted) {
            rep.stop_reason = "step collapsed before tolerances";
            break;
        }
        u = std::move(w);
        Jcur = Jw;
        rep.energy_trace.push_back(Jcur);
        step = std::min(step * 2.0, 1e6);
    }
    if (it == cfg.max_iters) {
        rep.stop_reason = "iteration cap";
        const Field G = residual_EL(P, spec, ker, dom, u);
        res = norm2(G) / std::max(1.0, norm2(u));
        neh = std::abs(dot(G, u)) / h_norm_sq(P, spec, dom, u);
        rep.residual_trace.push_back(res);
    }

    // deterministic sign convention
    double total = 0.0;
    for (double v : u.values) total += v;
    if (total < 0.0)
        for (double& v : u.values) v = -v;

    rep.energy = Jcur;
    rep.residual_rel = res;
    rep.nehari_residuals = {neh};
    rep.iterations = it;
    rep.sign_counts = count_signs(u);
    return {std::move(u), std::move(rep)};
}

std::pair<Field, SolveReport> solve_sign_changing(const Params& P, const PotentialSpec& spec,
                                                  const KernelTable& ker, const BoxDomain& dom,
                                                  const SolveConfig& cfg) {
    P.validate_sign_changing();
    cfg.validate();
    if (!ker.covers(dom)) throw std::invalid_argument("kernel does not cover the box");

    Field u = make_init(dom, cfg);
    {
        const auto [pos, neg] = count_signs(u);
        if (pos == 0 || neg == 0) {
            throw std::invalid_argument("sign-changing solve needs an init with both signs");
        }
    }
    // Stored re-seed patterns keep only the shape; the pair projection sets
    // the amplitude, so they are normalized to unit sup norm.
    auto [init_plus, init_minus] = split_signs(u);
    const auto sup_norm = [](const Field& v) {
        double m = 0.0;
        for (double x : v.values) m = std::max(m, std::abs(x));
        return m;
    };
    {
        const double mp = sup_norm(init_plus), mm = sup_norm(init_minus);
        for (double& x : init_plus.values) x /= mp;
        for (double& x : init_minus.values) x /= mm;
    }

    SolveReport rep;

    // A sign is dead when it has no vertices left or its amplitude is so
    // small that |.|^p underflows (the convolution coefficient would vanish).
    // Re-seeds are counted only when the trial that needed them is accepted.
    constexpr double kDeadAmplitude = 1e-60;
    int pending_reseeds = 0;
    const auto ensure_signs = [&](Field& v) {
        auto [vp, vm] = split_signs(v);
        const bool plus_dead = sup_norm(vp) < kDeadAmplitude;
        const bool minus_dead = sup_norm(vm) < kDeadAmplitude;
        if (!plus_dead && !minus_dead) return;
        if (rep.reseeds + pending_reseeds >= cfg.reseed_cap) {
            throw std::runtime_error("persistent sign death: re-seed cap exhausted");
        }
        ++pending_reseeds;
        const Field& pattern = plus_dead ? init_plus : init_minus;
        for (std::size_t n = 0; n < v.values.size(); ++n) v.values[n] += pattern.values[n];
    };

    const auto project = [&](Field v) {
        pending_reseeds = 0;
        ensure_signs(v);
        const SignCoeffs sc = sign_coeffs(P, spec, ker, dom, v);
        const double tol = 1e-12 * (sc.Aplus + sc.Aminus);
        const PairProjection pp = project_pair(sc, tol, 0);
        auto [vp, vm] = split_signs(v);
        Field w(dom);
        for (std::size_t n = 0; n < w.values.size(); ++n)
            w.values[n] = pp.s_u * vp.values[n] + pp.t_u * vm.values[n];
        return w;
    };

    u = project(std::move(u));
    rep.reseeds += pending_reseeds;
    double Jcur = energy_J(P, spec, ker, dom, u);
    rep.energy_trace.push_back(Jcur);

    double step = cfg.step0;
    double res = 0.0, neh_p = 0.0, neh_m = 0.0;
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        const Field G = residual_EL(P, spec, ker, dom, u);
        const double gnorm2 = dot(G, G);
        res = std::sqrt(gnorm2) / std::max(1.0, norm2(u));
        const auto [up, um] = split_signs(u);
        const double nsq = h_norm_sq(P, spec, dom, u);
        neh_p = std::abs(dot(G, up)) / nsq;
        neh_m = std::abs(dot(G, um)) / nsq;
        rep.residual_trace.push_back(res);
        if (res <= cfg.tol_residual && neh_p <= cfg.tol_nehari && neh_m <= cfg.tol_nehari) {
            rep.converged = true;
            rep.stop_reason = "tolerances reached";
            break;
        }
        const double j_resolution = 1e-12 * (1.0 + std::abs(Jcur));
        bool accepted = false;
        Field w;
        double Jw = 0.0;
        while (step > 1e-18) {
            Field v(dom);
            for (std::size_t n = 0; n < u.values.size(); ++n)
                v.values[n] = u.values[n] - step * G.values[n];
            bool projectable = true;
            try {
                w = project(std::move(v));
            } catch (const std::invalid_argument&) {
                projectable = false;
            }
            if (projectable) {
                Jw = energy_J(P, spec, ker, dom, w);
                if (Jw <= Jcur - cfg.armijo * step * gnorm2) {
                    accepted = true;
                    break;
                }
                if (cfg.armijo * step * gnorm2 <= j_resolution && Jw <= Jcur + 0.1 * j_resolution) {
                    const Field Gw = residual_EL(P, spec, ker, dom, w);
                    if (dot(Gw, Gw) < gnorm2) {
                        accepted = true;
                        break;
                    }
                }
            }
            step *= cfg.backtrack;
        }
        if (!accepted) {
            rep.stop_reason = "step collapsed before tolerances";
            break;
        }
        rep.reseeds += pending_reseeds;
        u = std::move(w);
        Jcur = Jw;
        rep.energy_trace.push_back(Jcur);
        step = std::min(step * 2.0, 1e6);
    }
    if (it == cfg.max_iters) {
        rep.stop_reason = "iteration cap";
        const Field G = residual_EL(P, spec, ker, dom, u);
        res = norm2(G) / std::max(1.0, norm2(u));
        const auto [up, um] = split_signs(u);
        const double nsq = h_norm_sq(P, spec, dom, u);
        neh_p = std::abs(dot(G, up)) / nsq;
        neh_m = std::abs(dot(G, um)) / nsq;
        rep.residual_trace.push_back(res);
    }

    rep.energy = Jcur;
    rep.residual_rel = res;
    rep.nehari_residuals = {neh_p, neh_m};
    rep.iterations = it;
    rep.sign_counts = count_signs(u);
    return {std::move(u), std::move(rep)};
}

std::vector<FiberSample> fiber_curve(const Params& P, const PotentialSpec& spec,
                                     const KernelTable& ker, const BoxDomain& dom, const Field& u,
                                     const std::vector<double>& s_grid) {
    if (norm2(u) == 0.0) throw std::invalid_argument("fiber_curve requires a nonzero field");
    std::vector<FiberSample> out;
    out.reserve(s_grid.size());
    for (double s : s_grid) {
        Field su(dom);
        for (std::size_t n = 0; n < u.values.size(); ++n) su.values[n] = s * u.values[n];
        FiberSample sample;
        sample.s = s;
        if (s == 0.0) {
            sample.energy = 0.0;
            sample.pairing = 0.0;
        } else {
            sample.energy = energy_J(P, spec, ker, dom, su);
            sample.pairing = pairing_J_prime(P, spec, ker, dom, su, su);
        }
        out.push_back(sample);
    }
    return out;
}

}  // namespace kcq
