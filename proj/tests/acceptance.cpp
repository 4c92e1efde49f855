// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// fails. Criterion 11 drives the installed CLI end to end; pass its path via
// --cli (the ctest registration does).
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "kcq/io.hpp"
#include "kcq/nehari.hpp"
#include "kcq/rng.hpp"
#include "kcq/solver.hpp"
#include "kcq/verify.hpp"

using namespace kcq;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    int number;
    std::string name;
    std::function<std::string()> run;  // empty string = pass, else failure detail
};

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Field scale(const Field& u, double s) {
    Field w(u.domain);
    for (std::size_t n = 0; n < u.size(); ++n) w[n] = s * u[n];
    return w;
}

std::string g_cli_path;
fs::path g_work;

int run_cli(const std::string& args) {
    const std::string cmd = g_cli_path + " " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

// ---------------------------------------------------------------------------
// 1. analytic kernel anchors
std::string criterion_kernel_anchors() {
    const auto t0 = std::chrono::steady_clock::now();
    QuadratureSpec quad{64, 1};
    const double k2 = fractional_degree(2.0, quad);
    if (std::abs(k2 - 6.0) > 1e-10) return "K_2 = " + format_double(k2);
    const double k0 = fractional_degree(1e-6, quad);
    if (std::abs(k0 - 1.0) > 1e-4) return "K_1e-6 = " + format_double(k0);
    if (elapsed_s(t0) > 5.0) return "too slow";
    return {};
}

// 2. kernel self-consistency per alpha
std::string criterion_kernel_consistency() {
    for (double alpha : {1.0, 2.0}) {
        const auto t0 = std::chrono::steady_clock::now();
        const KernelTable fine = build_kernel(alpha, 16, QuadratureSpec{512, 2});
        if (!check_symmetry(fine)) return "symmetry expansion broken";
        // orbit spot checks across signs and permutations
        if (fine.value(3, -7, 2) != fine.value(-2, 3, 7)) return "orbit value differs";
        if (fine.value(16, 0, -16) != fine.value(-16, 16, 0)) return "orbit value differs";

        // refinement monotonicity across three levels
        const KernelTable k1 = build_kernel(alpha, 16, QuadratureSpec{128, 1});
        const KernelTable k2 = build_kernel(alpha, 16, QuadratureSpec{256, 1});
        const KernelTable k3 = build_kernel(alpha, 16, QuadratureSpec{512, 1});
        for (std::size_t i = 0; i < k1.canonical.size(); ++i) {
            const double d12 = std::abs(k1.canonical[i] - k2.canonical[i]);
            const double d23 = std::abs(k2.canonical[i] - k3.canonical[i]);
            if (d23 > d12 + 1e-14) return "refinement differences not monotone";
        }

        double lo = 1e300, hi = -1e300;
        for (int n = 8; n <= 16; ++n) {
            const double r = fine.value(n, 0, 0) * std::pow(n, 3.0 - alpha);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        if ((hi - lo) / lo >= 0.05) {
            return "asymptotic ratio varies " + format_double(100.0 * (hi - lo) / lo) +
                   "% at alpha=" + format_double(alpha);
        }
        if (elapsed_s(t0) > 120.0) return "too slow";
    }
    return {};
}

// 3. convolution oracles
std::string criterion_convolution() {
    const auto t0 = std::chrono::steady_clock::now();
    const KernelTable ker = build_kernel(2.0, 6, QuadratureSpec{32, 2});
    {
        const BoxDomain dom = BoxDomain::centered(5);
        Rng rng(301);
        for (int trial = 0; trial < 100; ++trial) {
            const Field w = random_field(dom, rng);
            const Field a = convolve_direct(ker, dom, w);
            const Field b = convolve_fft(ker, dom, w);
            double scale_a = 0.0;
            for (double v : a.values) scale_a = std::max(scale_a, std::abs(v));
            for (std::size_t n = 0; n < a.size(); ++n) {
                if (std::abs(a[n] - b[n]) > 1e-12 * scale_a) {
                    return "fft/direct disagree at trial " + std::to_string(trial);
                }
            }
        }
    }
    {
        const BoxDomain dom = BoxDomain::centered(3);
        Rng rng(302);
        for (int trial = 0; trial < 20; ++trial) {
            const Field w = random_field(dom, rng);
            const Field got = convolve_direct(ker, dom, w);
            double scale_g = 0.0;
            for (double v : got.values) scale_g = std::max(scale_g, std::abs(v));
            for (std::int64_t n = 0; n < dom.vertex_count(); ++n) {
                const Coord x = dom.coord_of(n);
                double acc = 0.0;
                for (std::int64_t m = 0; m < dom.vertex_count(); ++m) {
                    const Coord y = dom.coord_of(m);
                    acc += ker.value(x[0] - y[0], x[1] - y[1], x[2] - y[2]) *
                           w.values[static_cast<std::size_t>(m)];
                }
                if (std::abs(got.values[static_cast<std::size_t>(n)] - acc) > 1e-14 * scale_g) {
                    return "direct path disagrees with triple loop";
                }
            }
        }
    }
    if (elapsed_s(t0) > 30.0) return "too slow";
    return {};
}

// 4. exact identities
std::string criterion_identities() {
    const auto t0 = std::chrono::steady_clock::now();
    const KernelTable ker = build_kernel(2.0, 8, QuadratureSpec{32, 2});
    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    Rng rng(401);
    const double ps[] = {3.0, 4.5, 5.0};
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int L = 3 + static_cast<int>(rng.next() % 7);
        const BoxDomain dom = BoxDomain::centered(L);
        Params P;
        P.p = ps[trial % 3];
        const Field u = random_sign_changing_field(dom, rng);
        const double s = rng.uniform(1e-3, 3.0), t = rng.uniform(1e-3, 3.0);
        worst = std::max(worst, decomposition_check(P, h1, ker, dom, u, s, t).max_residual());
    }
    if (worst > 1e-10) return "max identity residual " + format_double(worst);
    if (elapsed_s(t0) > 120.0) return "too slow";
    return {};
}

// 5. gradient certification
std::string criterion_gradient() {
    const auto t0 = std::chrono::steady_clock::now();
    const KernelTable ker = build_kernel(2.0, 8, QuadratureSpec{32, 2});
    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    const BoxDomain dom = BoxDomain::centered(4);
    Params P;
    Rng rng(501);
    for (int trial = 0; trial < 20; ++trial) {
        Field u = random_field(dom, rng);
        const double nu = lp_norm(u, 2.0);
        for (double& v : u.values) v /= nu;
        Field phi = random_field(dom, rng);
        const double np = lp_norm(phi, 2.0);
        for (double& v : phi.values) v /= np;
        const double pairing = pairing_J_prime(P, h1, ker, dom, u, phi);
        const auto fd_err = [&](double eps) {
            Field up(dom), um(dom);
            for (std::size_t n = 0; n < u.size(); ++n) {
                up[n] = u[n] + eps * phi[n];
                um[n] = u[n] - eps * phi[n];
            }
            return std::abs((energy_J(P, h1, ker, dom, up) - energy_J(P, h1, ker, dom, um)) /
                                (2.0 * eps) -
                            pairing);
        };
        const double ratio = fd_err(1e-4) / fd_err(5e-5);
        if (ratio < 3.5 || ratio > 4.5) {
            return "fd ratio " + format_double(ratio) + " at trial " + std::to_string(trial);
        }
    }
    if (elapsed_s(t0) > 60.0) return "too slow";
    return {};
}

// 6. fiber root
std::string criterion_fiber_root() {
    FiberCoeffs cf;
    cf.A = cf.B = cf.D = 1.0;
    cf.p = 3.0;
    const RayProjection rp = project_ray(cf, 1e-15);
    const double expect = std::sqrt(0.5 * (1.0 + std::sqrt(5.0)));
    if (std::abs(rp.s_star - expect) > 1e-12) return "closed-form root " + format_double(rp.s_star);

    const KernelTable ker = build_kernel(2.0, 8, QuadratureSpec{32, 2});
    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    const BoxDomain dom = BoxDomain::centered(5);
    Params P;
    Rng rng(601);
    for (int trial = 0; trial < 20; ++trial) {
        const Field u = random_smooth_field(dom, rng);
        const FiberCoeffs c = fiber_coeffs(P, h1, ker, dom, u);
        const RayProjection r = project_ray(c);
        const Field su = scale(u, r.s_star);
        const double nsq = h_norm_sq(P, h1, dom, su);
        if (std::abs(pairing_J_prime(P, h1, ker, dom, su, su)) > 1e-10 * nsq) {
            return "post-projection pairing too large";
        }
        // fiber_curve maximum collocates with the root
        std::vector<double> grid;
        for (int i = 0; i <= 200; ++i) grid.push_back(r.s_star * (0.2 + 1.6 * i / 200.0));
        const auto curve = fiber_curve(P, h1, ker, dom, u, grid);
        std::size_t argmax = 0;
        for (std::size_t i = 0; i < curve.size(); ++i) {
            if (curve[i].energy > curve[argmax].energy) argmax = i;
        }
        const double ds = grid[1] - grid[0];
        if (std::abs(curve[argmax].s - r.s_star) > 1.5 * ds) {
            return "fiber maximum not at the projection";
        }
    }
    return {};
}

// 7. pair projection
std::string criterion_pair_projection() {
    const KernelTable ker = build_kernel(2.0, 8, QuadratureSpec{32, 2});
    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    const BoxDomain dom = BoxDomain::centered(5);
    Params P;
    P.p = 5.0;
    Rng rng(701);
    for (int trial = 0; trial < 20; ++trial) {
        Field u = random_smooth_sign_changing_field(dom, rng);
        const double nu = lp_norm(u, 2.0);
        for (double& v : u.values) v /= nu;
        const SignCoeffs c = sign_coeffs(P, h1, ker, dom, u);
        const double tol = 1e-12 * (c.Aplus + c.Aminus);
        const PairProjection pp = project_pair(c, tol, 0);

        double grid_best = -1e300;
        for (int i = 0; i < 200; ++i) {
            const double s = std::pow(10.0, -2.0 + 4.0 * (i + 0.5) / 200.0);
            for (int j = 0; j < 200; ++j) {
                const double t = std::pow(10.0, -2.0 + 4.0 * (j + 0.5) / 200.0);
                grid_best = std::max(grid_best, f_eval(c, s, t));
            }
        }
        const double fstar = f_eval(c, pp.s_u, pp.t_u);
        if (fstar < grid_best - 1e-12 * std::abs(grid_best)) return "grid scan beat the projection";

        auto [up, um] = split_signs(u);
        Field v(dom);
        for (std::size_t n = 0; n < v.size(); ++n) v[n] = pp.s_u * up[n] + pp.t_u * um[n];
        auto [vp, vm] = split_signs(v);
        if (std::abs(pairing_J_prime(P, h1, ker, dom, v, vp)) > 1e-8) return "Phi_+ too large";
        if (std::abs(pairing_J_prime(P, h1, ker, dom, v, vm)) > 1e-8) return "Phi_- too large";

        for (std::uint64_t seed = 1; seed < 10; ++seed) {
            const PairProjection alt = project_pair(c, tol, seed);
            if (std::abs(alt.s_u - pp.s_u) > 1e-7 * std::max(1.0, pp.s_u) ||
                std::abs(alt.t_u - pp.t_u) > 1e-7 * std::max(1.0, pp.t_u)) {
                return "multi-start pairs disagree";
            }
        }
    }
    return {};
}

// 8. ground solve regression
std::string criterion_ground_regression() {
    const auto t0 = std::chrono::steady_clock::now();
    const KernelTable ker = build_kernel(2.0, 8, QuadratureSpec{64, 2});
    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    const BoxDomain dom = BoxDomain::centered(9);
    Params P;  // a=b=1, p=3, alpha=2

    SolveConfig cfg;
    cfg.init = SolveConfig::Init::random_positive;
    cfg.rng_seed = 1;
    const auto [u1, r1] = solve_ground(P, h1, ker, dom, cfg);
    cfg.rng_seed = 2;
    const auto [u2, r2] = solve_ground(P, h1, ker, dom, cfg);

    if (!r1.converged || !r2.converged) return "not converged";
    if (r1.residual_rel > 1e-6) return "residual " + format_double(r1.residual_rel);
    if (!(r1.energy > 0.0)) return "energy not positive";
    if (r1.sign_counts.second != 0) return "output not one-signed";
    if (std::abs(r1.energy - r2.energy) > 1e-6) {
        return "cross-seed disagreement " + format_double(std::abs(r1.energy - r2.energy));
    }

    // single-vertex closed form
    const BoxDomain dot{1, {0, 0, 0}};
    SolveConfig cfg1;
    cfg1.tol_residual = 1e-12;
    cfg1.tol_nehari = 1e-13;
    const auto [us, rs] = solve_ground(P, h1, ker, dot, cfg1);
    const double R0 = ker.value(0, 0, 0);
    const auto g = [&](double x) { return 7.0 + 36.0 * x - R0 * x * x; };
    double lo = 0.0, hi = 1.0;
    while (g(hi) > 0.0) hi *= 2.0;
    for (int i = 0; i < 500; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    const double expect = std::sqrt(0.5 * (lo + hi));
    if (std::abs(us.values[0] - expect) > 1e-10) return "single-vertex oracle mismatch";

    if (elapsed_s(t0) > 60.0) return "too slow";
    return {};
}

// 9. sign-changing solve regression
std::string criterion_sc_regression() {
    const auto t0 = std::chrono::steady_clock::now();
    const KernelTable ker = build_kernel(2.0, 8, QuadratureSpec{64, 2});
    const BoxDomain dom = BoxDomain::centered(9);
    const PotentialSpec co = PotentialSpec::coercive(1.0, 0.5, {0, 0, 0});
    Params P;
    P.p = 5.0;

    SolveConfig cfg;
    cfg.init = SolveConfig::Init::sign_bump;
    const auto [u, rep] = solve_sign_changing(P, co, ker, dom, cfg);
    if (!rep.converged) return "not converged";
    if (rep.nehari_residuals[0] > 1e-6 || rep.nehari_residuals[1] > 1e-6) {
        return "pairing residuals too large";
    }
    if (rep.sign_counts.first == 0 || rep.sign_counts.second == 0) return "a sign died";
    if (!(rep.energy > 0.0)) return "m not positive";

    // boundary decay under the coercive potential
    double interior_max = 0.0, shell_max = 0.0;
    for (std::int64_t n = 0; n < dom.vertex_count(); ++n) {
        const Coord x = dom.coord_of(n);
        const bool shell = std::abs(x[0]) == 4 || std::abs(x[1]) == 4 || std::abs(x[2]) == 4;
        const double v = std::abs(u.values[static_cast<std::size_t>(n)]);
        (shell ? shell_max : interior_max) = std::max(shell ? shell_max : interior_max, v);
    }
    if (shell_max > 1e-3 * interior_max) return "no boundary decay";

    // m above the ground level of the same problem
    SolveConfig gcfg;
    const auto [ug, repg] = solve_ground(P, co, ker, dom, gcfg);
    if (!repg.converged) return "ground solve for comparison failed";
    if (!(rep.energy > repg.energy)) return "m <= c";

    if (elapsed_s(t0) > 180.0) return "too slow";
    return {};
}

// 10. inequality suite
std::string criterion_inequalities() {
    const auto t0 = std::chrono::steady_clock::now();
    const BoxDomain dom = BoxDomain::centered(5);
    Rng rng(1001);
    for (int trial = 0; trial < 1000; ++trial) {
        const Field u = random_field(dom, rng);
        if (k_v(dom, u) > 0.0) return "K_V positive";
        double l2sq = 0.0;
        for (double v : u.values) l2sq += v * v;
        if (dirichlet_energy(dom, u) > 12.0 * l2sq * (1.0 + 1e-12)) return "(2.2) bound broken";
        const double lhs = std::pow(lp_norm(u, 4.0), 4.0);
        const double rhs = std::pow(lp_norm(u, 2.0), 2.0) *
                           std::pow(lp_norm(u, std::numeric_limits<double>::infinity()), 2.0);
        if (lhs > rhs * (1.0 + 1e-12)) return "interpolation inequality broken";
    }
    const KernelTable ker = build_kernel(2.0, 4, QuadratureSpec{32, 2});
    const double r = 6.0 / 5.0;
    Rng rng2(1002);
    for (int trial = 0; trial < 25; ++trial) {
        const Field u = random_field(dom, rng2), v = random_field(dom, rng2);
        const double base = hls_ratio(ker, dom, u, v, r, r);
        const double lam = rng2.uniform(0.2, 20.0);
        const double scaled = hls_ratio(ker, dom, scale(u, lam), v, r, r);
        if (std::abs(scaled - base) > 1e-12 * base) return "hls ratio not scale invariant";
    }
    if (elapsed_s(t0) > 30.0) return "too slow";
    return {};
}

// 11. determinism through the CLI
std::string criterion_determinism() {
    if (g_cli_path.empty()) return "no --cli path given";
    const fs::path base = g_work / "det";
    fs::create_directories(base);
    const std::string cache = " --kernel-cache " + (base / "cache").string();

    for (const char* sub : {"a", "b"}) {
        const fs::path out = base / ("verify-" + std::string(sub));
        const int rc = run_cli("verify --seed 7 --quad-n 16 --out " + out.string() + cache);
        if (rc != 0) return "verify exited " + std::to_string(rc);
    }
    if (read_file(base / "verify-a" / "verify.json") !=
        read_file(base / "verify-b" / "verify.json")) {
        return "verify reports differ";
    }

    const std::string solve_args =
        " --box 5 --p 3 --alpha 2 --quad-n 32 --seed 11 --init random --tol 1e-6" + cache;
    for (const char* sub : {"a", "b"}) {
        const fs::path out = base / ("solve-" + std::string(sub));
        const int rc = run_cli("solve" + solve_args + " --out " + out.string());
        if (rc != 0) return "solve exited " + std::to_string(rc);
    }
    for (const char* f : {"report.json", "solution.f64", "solution.json", "trace.csv"}) {
        if (read_file(base / "solve-a" / f) != read_file(base / "solve-b" / f)) {
            return std::string(f) + " differs between runs";
        }
    }
    return {};
}

}  // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--cli") g_cli_path = argv[i + 1];
    }
    g_work = fs::temp_directory_path() / "kcq-acceptance";
    std::error_code ec;
    fs::remove_all(g_work, ec);
    fs::create_directories(g_work);

    const std::vector<Criterion> criteria = {
        {1, "analytic kernel anchors (K_2 = 6, K_0+ = 1)", criterion_kernel_anchors},
        {2, "kernel self-consistency (symmetry, refinement, decay)", criterion_kernel_consistency},
        {3, "convolution oracle (fft vs direct vs triple loop)", criterion_convolution},
        {4, "exact decomposition identities", criterion_identities},
        {5, "gradient certification (second-order fd)", criterion_gradient},
        {6, "fiber root (closed form + projection residual)", criterion_fiber_root},
        {7, "pair projection (grid dominance, Phi = 0, uniqueness)", criterion_pair_projection},
        {8, "ground solve regression (9^3 + single vertex)", criterion_ground_regression},
        {9, "sign-changing solve regression (9^3 coercive)", criterion_sc_regression},
        {10, "inequality suite (K_V, Dirichlet, interpolation, HLS)", criterion_inequalities},
        {11, "determinism of verify and solve runs", criterion_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        std::string detail;
        try {
            detail = c.run();
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const bool ok = detail.empty();
        failures += ok ? 0 : 1;
        std::cout << (ok ? "PASS" : "FAIL") << "  " << c.number << ". " << c.name;
        if (!ok) std::cout << "  [" << detail << "]";
        std::cout << "\n";
    }
    std::cout << (failures == 0 ? "acceptance: all criteria passed"
                                : "acceptance: " + std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
