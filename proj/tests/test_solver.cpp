#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "kcq/rng.hpp"
#include "kcq/solver.hpp"

using namespace kcq;

namespace {

const KernelTable& test_kernel() {
    static const KernelTable ker = build_kernel(2.0, 8, QuadratureSpec{64, 2});
    return ker;
}

// 1-D oracle for the single-vertex box: J(u) reduces to a scalar polynomial
// and the positive stationary point solves (6a + h) + 36 b x - R0 x^{p-1} = 0
// in x = u^2 (bisection, no shared code with the solver).
double single_vertex_oracle(double a, double b, double h, double R0, double p) {
    const double A = 6.0 * a + h;
    const auto g = [&](double x) { return A + 36.0 * b * x - R0 * std::pow(x, p - 1.0); };
    double lo = 0.0, hi = 1.0;
    while (g(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 500; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return std::sqrt(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("single-vertex box matches the scalar closed form") {
    const BoxDomain dom{1, {0, 0, 0}};
    const KernelTable& ker = test_kernel();
    Params P;  // a=b=1, p=3
    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    SolveConfig cfg;
    cfg.tol_residual = 1e-12;
    cfg.tol_nehari = 1e-13;

    const auto [u, rep] = solve_ground(P, h1, ker, dom, cfg);
    CHECK(rep.converged);
    const double expect = single_vertex_oracle(1.0, 1.0, 1.0, ker.value(0, 0, 0), 3.0);
    CHECK(u.values[0] == doctest::Approx(expect).epsilon(1e-10));
    CHECK(rep.energy > 0.0);
}

TEST_CASE("ground state on a small box") {
    const BoxDomain dom = BoxDomain::centered(5);
    const KernelTable& ker = test_kernel();
    Params P;
    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    SolveConfig cfg;

    const auto [u, rep] = solve_ground(P, h1, ker, dom, cfg);
    CHECK(rep.converged);
    CHECK(rep.residual_rel <= cfg.tol_residual);
    CHECK(rep.nehari_residuals.size() == 1);
    CHECK(rep.nehari_residuals[0] <= cfg.tol_nehari);
    CHECK(rep.energy > 0.0);
    CHECK(rep.sign_counts.second == 0);  // one-signed after normalization
    CHECK(rep.sign_counts.first > 0);

    // energy trace never increases (slack for rounding)
    for (std::size_t i = 1; i < rep.energy_trace.size(); ++i) {
        CHECK(rep.energy_trace[i] <=
              rep.energy_trace[i - 1] + 1e-12 * (1.0 + std::abs(rep.energy_trace[i - 1])));
    }

    // residual() agrees with the report
    CHECK(residual(P, h1, ker, dom, u) == doctest::Approx(rep.residual_rel).epsilon(1e-6));

    // fixed point: restarting from the solution ends immediately
    SolveConfig cfg2 = cfg;
    cfg2.init = SolveConfig::Init::from_field;
    cfg2.init_field = u;
    const auto [u2, rep2] = solve_ground(P, h1, ker, dom, cfg2);
    CHECK(rep2.converged);
    CHECK(rep2.iterations <= 2);
    CHECK(std::abs(rep2.energy - rep.energy) <= 1e-10 * (1.0 + std::abs(rep.energy)));
}

TEST_CASE("energy and fiber data are translation invariant for periodic h") {
    // exact statement: for a field supported strictly inside the box, the
    // one-step translate has identical energy and fiber coefficients
    const BoxDomain dom = BoxDomain::centered(7);
    const KernelTable& ker = test_kernel();
    Params P;
    std::vector<double> cell(8);
    for (std::size_t i = 0; i < 8; ++i) cell[i] = 1.0 + 0.25 * static_cast<double>(i);
    const PotentialSpec h1 = PotentialSpec::constant(1.0);        // 1-periodic
    const PotentialSpec h2 = PotentialSpec::periodic(2, cell);    // 2-periodic

    Rng rng(51);
    Field u(dom);
    for (std::int64_t n = 0; n < dom.vertex_count(); ++n) {
        const Coord x = dom.coord_of(n);
        const bool inner = std::abs(x[0]) <= 1 && std::abs(x[1]) <= 1 && std::abs(x[2]) <= 1;
        if (inner) u.values[static_cast<std::size_t>(n)] = rng.uniform(-1.0, 1.0);
    }
    const auto translate = [&](const Field& v, int step) {
        Field w(dom);
        for (std::int64_t n = 0; n < dom.vertex_count(); ++n) {
            Coord x = dom.coord_of(n);
            x[0] -= step;
            if (dom.contains(x)) {
                w.values[static_cast<std::size_t>(n)] = v.at(x);
            }
        }
        return w;
    };

    const Field t1 = translate(u, 1);
    CHECK(energy_J(P, h1, ker, dom, u) ==
          doctest::Approx(energy_J(P, h1, ker, dom, t1)).epsilon(1e-13));
    const FiberCoeffs a = fiber_coeffs(P, h1, ker, dom, u);
    const FiberCoeffs b = fiber_coeffs(P, h1, ker, dom, t1);
    CHECK(a.A == doctest::Approx(b.A).epsilon(1e-13));
    CHECK(a.B == doctest::Approx(b.B).epsilon(1e-13));
    CHECK(a.D == doctest::Approx(b.D).epsilon(1e-13));
    CHECK(project_ray(a).s_star == doctest::Approx(project_ray(b).s_star).epsilon(1e-12));

    // tau = 2 potential: invariance under a two-step translate
    const Field t2 = translate(u, 2);
    CHECK(energy_J(P, h2, ker, dom, u) ==
          doctest::Approx(energy_J(P, h2, ker, dom, t2)).epsilon(1e-13));
}

TEST_CASE("translating the init pattern does not move the ground energy") {
    const BoxDomain dom = BoxDomain::centered(9);
    const KernelTable& ker = test_kernel();
    Params P;
    const PotentialSpec h1 = PotentialSpec::constant(1.0);  // 1-periodic

    SolveConfig cfg;
    cfg.max_iters = 30000;
    const auto [u1, rep1] = solve_ground(P, h1, ker, dom, cfg);

    // same bump shifted one lattice step
    SolveConfig cfg2 = cfg;
    cfg2.init = SolveConfig::Init::from_field;
    Field shifted(dom);
    for (std::int64_t n = 0; n < dom.vertex_count(); ++n) {
        const Coord x = dom.coord_of(n);
        const double cx = x[0] - 1.0, cy = x[1], cz = x[2];
        shifted.values[static_cast<std::size_t>(n)] =
            std::exp(-0.5 * (cx * cx + cy * cy + cz * cz) / cfg.bump_width);
    }
    cfg2.init_field = shifted;
    const auto [u2, rep2] = solve_ground(P, h1, ker, dom, cfg2);

    CHECK(rep1.converged);
    CHECK(rep2.converged);
    CHECK(std::abs(rep1.energy - rep2.energy) <= 1e-6 * (1.0 + std::abs(rep1.energy)));
}

TEST_CASE("determinism: identical config gives identical trace") {
    const BoxDomain dom = BoxDomain::centered(5);
    const KernelTable& ker = test_kernel();
    Params P;
    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    SolveConfig cfg;
    cfg.init = SolveConfig::Init::random_positive;
    cfg.rng_seed = 17;

    const auto [u1, rep1] = solve_ground(P, h1, ker, dom, cfg);
    const auto [u2, rep2] = solve_ground(P, h1, ker, dom, cfg);
    REQUIRE(rep1.energy_trace.size() == rep2.energy_trace.size());
    for (std::size_t i = 0; i < rep1.energy_trace.size(); ++i) {
        CHECK(rep1.energy_trace[i] == rep2.energy_trace[i]);
    }
    for (std::size_t n = 0; n < u1.size(); ++n) CHECK(u1[n] == u2[n]);
}

TEST_CASE("degenerate inits are rejected") {
    const BoxDomain dom = BoxDomain::centered(3);
    const KernelTable& ker = test_kernel();
    Params P;
    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    SolveConfig cfg;
    cfg.init = SolveConfig::Init::from_field;
    cfg.init_field = Field(dom);  // identically zero
    CHECK_THROWS_AS(solve_ground(P, h1, ker, dom, cfg), std::invalid_argument);
}

TEST_CASE("sign-changing solve on a small box") {
    const BoxDomain dom = BoxDomain::centered(7);
    const KernelTable& ker = test_kernel();
    Params P;
    P.p = 5.0;
    const PotentialSpec co = PotentialSpec::coercive(1.0, 0.5, {0, 0, 0});
    SolveConfig cfg;
    cfg.init = SolveConfig::Init::sign_bump;

    const auto [u, rep] = solve_sign_changing(P, co, ker, dom, cfg);
    CHECK(rep.converged);
    CHECK(rep.residual_rel <= cfg.tol_residual);
    REQUIRE(rep.nehari_residuals.size() == 2);
    CHECK(rep.nehari_residuals[0] <= cfg.tol_nehari);
    CHECK(rep.nehari_residuals[1] <= cfg.tol_nehari);
    CHECK(rep.energy > 0.0);
    CHECK(rep.sign_counts.first > 0);
    CHECK(rep.sign_counts.second > 0);
    for (std::size_t i = 1; i < rep.energy_trace.size(); ++i) {
        CHECK(rep.energy_trace[i] <=
              rep.energy_trace[i - 1] + 1e-12 * (1.0 + std::abs(rep.energy_trace[i - 1])));
    }

    // the sign-changing level sits above the ground level of the same problem
    const auto [ug, repg] = solve_ground(P, co, ker, dom, SolveConfig{});
    CHECK(repg.converged);
    CHECK(rep.energy > repg.energy);
}

TEST_CASE("sign-changing solve contracts") {
    const BoxDomain dom = BoxDomain::centered(5);
    const KernelTable& ker = test_kernel();
    const PotentialSpec h1 = PotentialSpec::constant(1.0);

    Params bad;
    bad.p = 3.0;
    SolveConfig cfg;
    cfg.init = SolveConfig::Init::sign_bump;
    CHECK_THROWS_AS(solve_sign_changing(bad, h1, ker, dom, cfg), std::invalid_argument);

    Params P;
    P.p = 5.0;
    SolveConfig one_signed;
    one_signed.init = SolveConfig::Init::positive_bump;
    CHECK_THROWS_AS(solve_sign_changing(P, h1, ker, dom, one_signed), std::invalid_argument);
}

TEST_CASE("a dying sign is re-seeded and reported") {
    const BoxDomain dom = BoxDomain::centered(5);
    const KernelTable& ker = test_kernel();
    Params P;
    P.p = 5.0;
    const PotentialSpec h1 = PotentialSpec::constant(1.0);

    // the negative amplitude is so small that |u|^p underflows: numerically a
    // dead sign, which the loop must re-seed from the (normalized) pattern
    SolveConfig cfg;
    cfg.init = SolveConfig::Init::from_field;
    Field init(dom);
    for (std::int64_t n = 0; n < dom.vertex_count(); ++n) {
        const Coord x = dom.coord_of(n);
        init.values[static_cast<std::size_t>(n)] =
            std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
    }
    init.at({1, 0, 0}) = -1e-70;
    cfg.init_field = init;
    cfg.reseed_cap = 8;

    const auto [u, rep] = solve_sign_changing(P, h1, ker, dom, cfg);
    CHECK(rep.reseeds >= 1);
    CHECK(rep.converged);
    CHECK(rep.sign_counts.first > 0);
    CHECK(rep.sign_counts.second > 0);

    // with no re-seed budget the same init is a persistent death
    SolveConfig strict = cfg;
    strict.reseed_cap = 0;
    CHECK_THROWS_AS(solve_sign_changing(P, h1, ker, dom, strict), std::runtime_error);
}

TEST_CASE("fiber curve shape") {
    const BoxDomain dom = BoxDomain::centered(5);
    const KernelTable& ker = test_kernel();
    Params P;
    const PotentialSpec h1 = PotentialSpec::constant(1.0);
    Rng rng(33);
    const Field u = random_field(dom, rng);

    // grid scaled to the projection so the curve contains its maximum
    const RayProjection rp = project_ray(fiber_coeffs(P, h1, ker, dom, u));
    std::vector<double> grid{0.0};
    for (int i = 0; i <= 100; ++i) grid.push_back(rp.s_star * (0.02 + 1.98 * i / 100.0));
    const auto curve = fiber_curve(P, h1, ker, dom, u, grid);

    CHECK(curve.front().s == 0.0);
    CHECK(curve.front().energy == 0.0);
    CHECK(curve.front().pairing == 0.0);
    CHECK(curve.back().energy < 0.0);
    std::size_t argmax = 0;
    int sign_changes = 0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        if (curve[i].energy > curve[argmax].energy) argmax = i;
        if (curve[i - 1].pairing > 0.0 && curve[i].pairing < 0.0) ++sign_changes;
    }
    CHECK(sign_changes == 1);
    REQUIRE(argmax > 0);
    REQUIRE(argmax + 1 < curve.size());
    CHECK(curve[argmax - 1].s <= rp.s_star);
    CHECK(rp.s_star <= curve[argmax + 1].s);

    CHECK_THROWS_AS(fiber_curve(P, h1, ker, dom, Field(dom), grid), std::invalid_argument);
}
