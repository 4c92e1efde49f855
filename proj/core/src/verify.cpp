#include "kcq/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "kcq/io.hpp"
#include "kcq/nehari.hpp"
#include "kcq/rng.hpp"
#include "kcq/solver.hpp"

namespace kcq {

namespace {

double l2_norm_sq(const Field& u) {
    double acc = 0.0;
    for (double v : u.values) acc += v * v;
    return acc;
}

Field scale_field(const Field& u, double s) {
    Field w(u.domain);
    for (std::size_t n = 0; n < u.values.size(); ++n) w.values[n] = s * u.values[n];
    return w;
}

CheckResult make_check(std::string name, double residual, double tol, std::string note = {}) {
    CheckResult c;
    c.name = std::move(name);
    c.max_residual = residual;
    c.tolerance = tol;
    c.pass = residual <= tol;
    c.note = std::move(note);
    return c;
}

CheckResult make_info(std::string name, double value, std::string note) {
    CheckResult c;
    c.name = std::move(name);
    c.max_residual = value;
    c.tolerance = std::numeric_limits<double>::infinity();
    c.pass = true;
    c.informational = true;
    c.note = std::move(note);
    return c;
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& opt) {
    std::vector<CheckResult> out;

    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    QuadratureSpec quad;
    quad.nodes_per_axis = opt.quad_n;
    quad.refinement_levels = 2;

    // Kernel covering every box the suite touches (sides up to 9).
    KernelTable ker;
    bool cache_hit = false;
    if (opt.cache_dir) {
        ker = load_or_build_kernel(*opt.cache_dir, opt.alpha, 8, quad, &cache_hit);
    } else {
        ker = build_kernel(opt.alpha, 8, quad);
    }

    // --- inequality block -------------------------------------------------
    {
        Rng rng(opt.seed);
        const BoxDomain dom = BoxDomain::centered(5);
        double max_kv = -std::numeric_limits<double>::infinity();
        double max_dirichlet_ratio = 0.0;
        double interp_violation = 0.0;
        double monotone_violation = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            const Field u = random_field(dom, rng);
            max_kv = std::max(max_kv, k_v(dom, u));
            max_dirichlet_ratio = std::max(max_dirichlet_ratio,
                                           dirichlet_energy(dom, u) / l2_norm_sq(u));
            const double s = 2.0, t = 4.0;
            const double lhs = std::pow(lp_norm(u, t), t);
            const double rhs = std::pow(lp_norm(u, s), s) *
                               std::pow(lp_norm(u, std::numeric_limits<double>::infinity()), t - s);
            interp_violation = std::max(interp_violation, (lhs - rhs) / std::max(lhs, 1e-300));
            if (trial < 100) {
                // ||u||_q nonincreasing in q once ||u||_inf <= 1
                double prev = std::numeric_limits<double>::infinity();
                for (double q : {1.0, 2.0, 3.0, 4.5, 8.0}) {
                    const double nq = lp_norm(u, q);
                    monotone_violation = std::max(monotone_violation, nq - prev);
                    prev = nq;
                }
            }
        }
        out.push_back(make_check("kv_nonpositive", std::max(max_kv, 0.0), 0.0,
                                 "max K_V over 1000 fields = " + format_double(max_kv)));
        out.push_back(make_check("dirichlet_upper_bound",
                                 std::max(max_dirichlet_ratio - 12.0, 0.0), 1e-12,
                                 "max Dirichlet/l2^2 ratio = " + format_double(max_dirichlet_ratio)));
        out.push_back(make_check("lp_interpolation", std::max(interp_violation, 0.0), 1e-12));
        out.push_back(make_check("lp_monotone", std::max(monotone_violation, 0.0), 1e-12));
    }

    // --- exact identity block ----------------------------------------------
    {
        Rng rng(opt.seed + 1);
        const double ps[] = {3.0, 4.5, 5.0};
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const int L = 3 + static_cast<int>(rng.next() % 7);  // 3..9
            const BoxDomain dom = BoxDomain::centered(L);
            Params P;
            P.p = ps[trial % 3];
            P.alpha = opt.alpha;
            const Field u = random_sign_changing_field(dom, rng);
            const double s = rng.uniform(1e-3, 3.0);
            const double t = rng.uniform(1e-3, 3.0);
            worst = std::max(worst,
                             decomposition_check(P, h1, ker, dom, u, s, t).max_residual());
        }
        out.push_back(make_check("decomposition_identities", worst, 1e-10,
                                 "100 sign-changing fields, boxes 3^3..9^3"));
    }

    // --- fiber consistency ---------------------------------------------------
    {
        Rng rng(opt.seed + 2);
        const BoxDomain dom = BoxDomain::centered(5);
        Params P;
        P.alpha = opt.alpha;
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const Field u = random_field(dom, rng);
            const FiberCoeffs fc = fiber_coeffs(P, h1, ker, dom, u);
            for (double s : {0.5, 1.0, 2.0}) {
                const Field su = scale_field(u, s);
                const double direct = pairing_J_prime(P, h1, ker, dom, su, su);
                const double fib = fc.fiber_value(s);
                worst = std::max(worst, std::abs(direct - fib) / (1.0 + std::abs(direct)));
            }
        }
        out.push_back(make_check("fiber_consistency", worst, 1e-10));
    }

    // --- gradient versus central finite differences -------------------------
    {
        Rng rng(opt.seed + 3);
        const BoxDomain dom = BoxDomain::centered(4);
        Params P;
        P.alpha = opt.alpha;
        double lo_ratio = std::numeric_limits<double>::infinity(), hi_ratio = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            Field u = random_field(dom, rng);
            const double nu = std::sqrt(l2_norm_sq(u));
            u = scale_field(u, 1.0 / nu);
            Field phi = random_field(dom, rng);
            const double np = std::sqrt(l2_norm_sq(phi));
            phi = scale_field(phi, 1.0 / np);
            const double pairing = pairing_J_prime(P, h1, ker, dom, u, phi);
            const auto fd_err = [&](double eps) {
                Field up(dom), um(dom);
                for (std::size_t n = 0; n < u.values.size(); ++n) {
                    up.values[n] = u.values[n] + eps * phi.values[n];
                    um.values[n] = u.values[n] - eps * phi.values[n];
                }
                const double fd = (energy_J(P, h1, ker, dom, up) - energy_J(P, h1, ker, dom, um)) /
                                  (2.0 * eps);
                return std::abs(fd - pairing);
            };
            const double ratio = fd_err(1e-4) / fd_err(5e-5);
            lo_ratio = std::min(lo_ratio, ratio);
            hi_ratio = std::max(hi_ratio, ratio);
        }
        const double dev = std::max({0.0, 3.5 - lo_ratio, hi_ratio - 4.5});
        out.push_back(make_check("gradient_fd_order", dev, 0.0,
                                 "epsilon-halving error ratios in [" + format_double(lo_ratio) +
                                     ", " + format_double(hi_ratio) + "]"));
    }

    // --- kernel block ---------------------------------------------------------
    {
        out.push_back(make_check("kernel_symmetry", check_symmetry(ker) ? 0.0 : 1.0, 0.0,
                                 "48-element orbits read identical bits"));

        // refinement monotonicity of |R^(n) - R^(2n)| on a small table
        QuadratureSpec q1{16, 1}, q2{32, 1}, q3{64, 1};
        const KernelTable k1 = build_kernel(opt.alpha, 4, q1);
        const KernelTable k2 = build_kernel(opt.alpha, 4, q2);
        const KernelTable k3 = build_kernel(opt.alpha, 4, q3);
        double violation = 0.0;
        for (std::size_t i = 0; i < k1.canonical.size(); ++i) {
            const double d12 = std::abs(k1.canonical[i] - k2.canonical[i]);
            const double d23 = std::abs(k2.canonical[i] - k3.canonical[i]);
            violation = std::max(violation, d23 - d12);
        }
        out.push_back(make_check("kernel_refinement_monotone", std::max(violation, 0.0), 1e-14));

        out.push_back(make_info("kernel_min_value", ker.min_table_value(),
                                ker.min_table_value() > 0.0 ? "table positive" : "table has nonpositive entries"));

        if (opt.cache_dir) {
            // a corrupted or stale cache file must not survive this
            QuadratureSpec coarse{quad.nodes_per_axis / 2, 1};
            const KernelTable fresh = build_kernel(opt.alpha, 8, coarse);
            double diff = 0.0;
            for (std::size_t i = 0; i < ker.canonical.size(); ++i) {
                diff = std::max(diff, std::abs(ker.canonical[i] - fresh.canonical[i]));
            }
            // the cached finest level differs from its own coarse level by
            // est_error, so twice that bounds an intact file
            const double tol = 2.0 * ker.est_error + 1e-12;
            out.push_back(make_check("kernel_cache_consistency", diff, tol,
                                     cache_hit ? "cache file cross-checked" : "cache freshly built"));
        }
    }

    // --- convolution agreement -------------------------------------------------
    {
        Rng rng(opt.seed + 4);
        const BoxDomain dom = BoxDomain::centered(5);
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const Field w = random_field(dom, rng);
            const Field a = convolve_direct(ker, dom, w);
            const Field b = convolve_fft(ker, dom, w);
            double scale = 0.0;
            for (double v : a.values) scale = std::max(scale, std::abs(v));
            for (std::size_t n = 0; n < a.values.size(); ++n) {
                worst = std::max(worst, std::abs(a.values[n] - b.values[n]) / std::max(scale, 1e-300));
            }
        }
        out.push_back(make_check("fft_direct_agreement", worst, 1e-12));
    }

    // --- HLS ratio ----------------------------------------------------------------
    {
        Rng rng(opt.seed + 5);
        const BoxDomain dom = BoxDomain::centered(5);
        const double r = 6.0 / (3.0 + opt.alpha);
        double scale_dev = 0.0, max_ratio = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            const Field u = random_field(dom, rng);
            const Field v = random_field(dom, rng);
            const double base = hls_ratio(ker, dom, u, v, r, r);
            max_ratio = std::max(max_ratio, base);
            if (trial < 50) {
                const double lam = rng.uniform(0.1, 10.0);
                const double scaled_ratio = hls_ratio(ker, dom, scale_field(u, lam), v, r, r);
                scale_dev = std::max(scale_dev, std::abs(scaled_ratio - base) / base);
            }
        }
        out.push_back(make_check("hls_scale_invariance", scale_dev, 1e-12));
        out.push_back(make_info("hls_empirical_constant", max_ratio,
                                "max pairing(|u|,|v|)/(||u||_r ||v||_s) over 1000 fields, r=s=6/(3+alpha)"));
    }

    // --- projection certificates -----------------------------------------------
    {
        Rng rng(opt.seed + 6);
        const BoxDomain dom = BoxDomain::centered(5);
        Params P;
        P.alpha = opt.alpha;
        double worst_ray = 0.0;
        double min_norm = std::numeric_limits<double>::infinity();
        for (int trial = 0; trial < 50; ++trial) {
            const Field u = random_smooth_field(dom, rng);
            const FiberCoeffs fc = fiber_coeffs(P, h1, ker, dom, u);
            const RayProjection rp = project_ray(fc);
            const Field su = scale_field(u, rp.s_star);
            const double nsq = h_norm_sq(P, h1, dom, su);
            worst_ray = std::max(worst_ray,
                                 std::abs(pairing_J_prime(P, h1, ker, dom, su, su)) / nsq);
            min_norm = std::min(min_norm, std::sqrt(nsq));
        }
        out.push_back(make_check("nehari_ray_residual", worst_ray, 1e-10,
                                 "direct pairing after projection"));
        out.push_back(make_check("nehari_norm_floor", min_norm > 1e-6 ? 0.0 : 1.0, 0.0,
                                 "min ||s*u|| over projected fields = " + format_double(min_norm)));

        // mountain-pass shape along random rays
        double mp_violation = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const Field u = random_field(dom, rng);
            const FiberCoeffs fc = fiber_coeffs(P, h1, ker, dom, u);
            const double t_small = 0.1 * std::pow(fc.A / fc.D, 1.0 / (2.0 * P.p - 2.0));
            if (!(fc.energy_along(t_small) > 0.0)) mp_violation = 1.0;
            double t_big = 1.0;
            bool negative = false;
            for (int k = 0; k < 200; ++k) {
                if (fc.energy_along(t_big) < 0.0) {
                    negative = true;
                    break;
                }
                t_big *= 2.0;
            }
            if (!negative) mp_violation = 1.0;
        }
        out.push_back(make_check("mountain_pass_geometry", mp_violation, 0.0,
                                 "J(tu) > 0 near 0 and < 0 far out on every sampled ray"));
    }

    // --- sign-changing projection -------------------------------------------------
    {
        Rng rng(opt.seed + 7);
        const BoxDomain dom = BoxDomain::centered(5);
        Params P;
        P.p = 5.0;
        P.alpha = opt.alpha;
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            const Field u = random_smooth_sign_changing_field(dom, rng);
            const SignCoeffs sc = sign_coeffs(P, h1, ker, dom, u);
            const PairProjection pp = project_pair(sc, 1e-12 * (sc.Aplus + sc.Aminus), 0);
            auto [up, um] = split_signs(u);
            Field v(dom);
            for (std::size_t n = 0; n < v.values.size(); ++n)
                v.values[n] = pp.s_u * up.values[n] + pp.t_u * um.values[n];
            auto [vp, vm] = split_signs(v);
            worst = std::max(worst, std::abs(pairing_J_prime(P, h1, ker, dom, v, vp)));
            worst = std::max(worst, std::abs(pairing_J_prime(P, h1, ker, dom, v, vm)));
        }
        out.push_back(make_check("pair_projection_zeroes", worst, 1e-8,
                                 "both components of Phi via the direct pairing"));
    }

    return out;
}

bool all_pass(const std::vector<CheckResult>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string verification_to_json(const VerifyOptions& opt, const std::vector<CheckResult>& checks) {
    nlohmann::json j;
    j["seed"] = opt.seed;
    j["alpha"] = opt.alpha;
    j["quad_n"] = opt.quad_n;
    j["all_pass"] = all_pass(checks);
    j["checks"] = nlohmann::json::array();
    for (const CheckResult& c : checks) {
        nlohmann::json e = {
            {"name", c.name},
            {"max_residual", c.max_residual},
            {"pass", c.pass},
            {"informational", c.informational},
        };
        if (std::isfinite(c.tolerance)) e["tolerance"] = c.tolerance;
        if (!c.note.empty()) e["note"] = c.note;
        j["checks"].push_back(e);
    }
    return j.dump(2) + "\n";
}

}  // namespace kcq
