// kcq: ground states and sign-changing ground states of the discrete
// Kirchhoff-Choquard equation on boxes in Z^3.
//
// Subcommands: kernel, solve, solve-sc, fiber, verify, sweep-L.
// Exit codes: 0 success, 1 non-convergence, 2 validation error, 3 I/O error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "kcq/energy.hpp"
#include "kcq/io.hpp"
#include "kcq/solver.hpp"
#include "kcq/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
    kcq::Params params;
    int box_L = 9;
    std::optional<kcq::Coord> origin;  // default: centered box
    std::string potential = "const:1.0";
    int quad_n = 128;
    int quad_levels = 2;
    double quad_tol = 0.0;  // 0 disables the est_error gate
    int max_offset = -1;    // -1: derived from the box (L-1)
    std::string kernel_cache;
    std::string init = "bump";  // bump | random | random-sign | file:<stem>
    double bump_width = 4.0;
    kcq::SolveConfig solve;
    std::string out = "out";
};

kcq::BoxDomain make_domain(const RunConfig& cfg) {
    if (cfg.box_L < 1) throw std::invalid_argument("box side must be >= 1");
    kcq::BoxDomain dom = kcq::BoxDomain::centered(cfg.box_L);
    if (cfg.origin) dom.origin = *cfg.origin;
    return dom;
}

kcq::PotentialSpec parse_potential(const std::string& text, const kcq::BoxDomain& dom) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (kind == "const") {
        return kcq::PotentialSpec::constant(rest.empty() ? 1.0 : std::stod(rest));
    }
    if (kind == "periodic") {
        if (rest.empty()) throw std::invalid_argument("periodic potential needs a JSON file path");
        std::ifstream is(rest);
        if (!is) throw std::invalid_argument("cannot read periodic potential file: " + rest);
        json j;
        is >> j;
        return kcq::PotentialSpec::periodic(j.at("tau").get<int>(),
                                            j.at("cell").get<std::vector<double>>());
    }
    if (kind == "coercive") {
        // coercive:<h0>,<slope>,center  or  coercive:<h0>,<slope>,<x>,<y>,<z>
        std::vector<std::string> parts;
        std::string cur;
        for (char ch : rest) {
            if (ch == ',') {
                parts.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        if (!cur.empty()) parts.push_back(cur);
        if (parts.size() != 3 && parts.size() != 5) {
            throw std::invalid_argument("coercive potential syntax: coercive:h0,slope,center|x,y,z");
        }
        const double h0 = std::stod(parts[0]);
        const double slope = std::stod(parts[1]);
        kcq::Coord center{0, 0, 0};
        if (parts.size() == 5) {
            for (int d = 0; d < 3; ++d) center[d] = std::stoi(parts[2 + d]);
        } else if (parts[2] == "center") {
            for (int d = 0; d < 3; ++d) center[d] = dom.origin[d] + (dom.side - 1) / 2;
        } else {
            throw std::invalid_argument("coercive potential: third field must be 'center' or x,y,z");
        }
        return kcq::PotentialSpec::coercive(h0, slope, center);
    }
    throw std::invalid_argument("unknown potential '" + text + "' (const:|periodic:|coercive:)");
}

fs::path resolve_cache_dir(const RunConfig& cfg) {
    if (!cfg.kernel_cache.empty()) return cfg.kernel_cache;
    if (const char* env = std::getenv("KC_CACHE_DIR"); env && *env) return env;
    return "kc-cache";
}

json potential_to_json(const kcq::PotentialSpec& spec) {
    using PS = kcq::PotentialSpec;
    if (const auto* c = std::get_if<PS::Constant>(&spec.variant())) {
        return {{"variant", "constant"}, {"h0", c->h0}};
    }
    if (const auto* p = std::get_if<PS::Periodic>(&spec.variant())) {
        return {{"variant", "periodic"}, {"tau", p->tau}, {"cell", p->cell}};
    }
    const auto& c = std::get<PS::Coercive>(spec.variant());
    return {{"variant", "coercive"},
            {"h0", c.h0},
            {"slope", c.slope},
            {"center", {c.center[0], c.center[1], c.center[2]}}};
}

std::string resolved_config_json(const RunConfig& cfg, const kcq::BoxDomain& dom,
                                 const kcq::PotentialSpec& spec, int max_offset) {
    json j = {
        {"a", cfg.params.a},
        {"b", cfg.params.b},
        {"p", cfg.params.p},
        {"alpha", cfg.params.alpha},
        {"box", {{"L", dom.side}, {"origin", {dom.origin[0], dom.origin[1], dom.origin[2]}}}},
        {"potential", potential_to_json(spec)},
        {"quad", {{"n", cfg.quad_n}, {"levels", cfg.quad_levels}, {"tol", cfg.quad_tol}}},
        {"M", max_offset},
        {"init", cfg.init},
        {"bump_width", cfg.bump_width},
        {"solve",
         {{"max_iters", cfg.solve.max_iters},
          {"step0", cfg.solve.step0},
          {"backtrack", cfg.solve.backtrack},
          {"armijo", cfg.solve.armijo},
          {"tol_residual", cfg.solve.tol_residual},
          {"tol_nehari", cfg.solve.tol_nehari},
          {"seed", cfg.solve.rng_seed},
          {"reseed_cap", cfg.solve.reseed_cap}}},
        {"out", cfg.out},
    };
    return j.dump();
}

void apply_config_json(RunConfig& cfg, const json& full) {
    // a report file embeds its config under "config"; accept either layout
    const json& j = full.contains("config") ? full.at("config") : full;
    if (j.contains("a")) cfg.params.a = j["a"].get<double>();
    if (j.contains("b")) cfg.params.b = j["b"].get<double>();
    if (j.contains("p")) cfg.params.p = j["p"].get<double>();
    if (j.contains("alpha")) cfg.params.alpha = j["alpha"].get<double>();
    if (j.contains("box")) {
        const json& box = j["box"];
        if (box.contains("L")) cfg.box_L = box["L"].get<int>();
        if (box.contains("origin")) {
            kcq::Coord o{};
            for (int d = 0; d < 3; ++d) o[d] = box["origin"].at(d).get<int>();
            cfg.origin = o;
        }
    }
    if (j.contains("potential")) {
        const json& pj = j["potential"];
        if (pj.is_string()) {
            cfg.potential = pj.get<std::string>();
        } else {
            const std::string variant = pj.at("variant").get<std::string>();
            if (variant == "constant") {
                cfg.potential = "const:" + kcq::format_double(pj.at("h0").get<double>());
            } else if (variant == "coercive") {
                const auto& c = pj.at("center");
                cfg.potential = "coercive:" + kcq::format_double(pj.at("h0").get<double>()) + "," +
                                kcq::format_double(pj.at("slope").get<double>()) + "," +
                                std::to_string(c.at(0).get<int>()) + "," +
                                std::to_string(c.at(1).get<int>()) + "," +
                                std::to_string(c.at(2).get<int>());
            } else if (variant == "periodic") {
                throw std::invalid_argument(
                    "periodic potential in JSON configs must use the string form "
                    "\"periodic:<file>\"");
            } else {
                throw std::invalid_argument("unknown potential variant in config");
            }
        }
    }
    if (j.contains("quad")) {
        const json& q = j["quad"];
        if (q.contains("n")) cfg.quad_n = q["n"].get<int>();
        if (q.contains("levels")) cfg.quad_levels = q["levels"].get<int>();
        if (q.contains("tol")) cfg.quad_tol = q["tol"].get<double>();
    }
    if (j.contains("M")) cfg.max_offset = j["M"].get<int>();
    if (j.contains("init")) cfg.init = j["init"].get<std::string>();
    if (j.contains("bump_width")) cfg.bump_width = j["bump_width"].get<double>();
    if (j.contains("solve")) {
        const json& s = j["solve"];
        if (s.contains("max_iters")) cfg.solve.max_iters = s["max_iters"].get<int>();
        if (s.contains("step0")) cfg.solve.step0 = s["step0"].get<double>();
        if (s.contains("backtrack")) cfg.solve.backtrack = s["backtrack"].get<double>();
        if (s.contains("armijo")) cfg.solve.armijo = s["armijo"].get<double>();
        if (s.contains("tol_residual")) cfg.solve.tol_residual = s["tol_residual"].get<double>();
        if (s.contains("tol_nehari")) cfg.solve.tol_nehari = s["tol_nehari"].get<double>();
        if (s.contains("seed")) cfg.solve.rng_seed = s["seed"].get<std::uint64_t>();
        if (s.contains("reseed_cap")) cfg.solve.reseed_cap = s["reseed_cap"].get<int>();
    }
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
}

void configure_init(RunConfig& cfg, const kcq::BoxDomain& dom, bool sign_changing) {
    cfg.solve.bump_width = cfg.bump_width;
    if (cfg.init == "bump") {
        cfg.solve.init = sign_changing ? kcq::SolveConfig::Init::sign_bump
                                       : kcq::SolveConfig::Init::positive_bump;
    } else if (cfg.init == "random") {
        cfg.solve.init = sign_changing ? kcq::SolveConfig::Init::random_sign
                                       : kcq::SolveConfig::Init::random_positive;
    } else if (cfg.init == "random-sign") {
        cfg.solve.init = kcq::SolveConfig::Init::random_sign;
    } else if (cfg.init.rfind("file:", 0) == 0) {
        cfg.solve.init = kcq::SolveConfig::Init::from_field;
        cfg.solve.init_field = kcq::load_field(cfg.init.substr(5));
        if (cfg.solve.init_field.domain != dom) {
            throw std::invalid_argument("init field box does not match the solve box");
        }
    } else {
        throw std::invalid_argument("unknown init '" + cfg.init +
                                    "' (bump | random | random-sign | file:<stem>)");
    }
}

kcq::KernelTable obtain_kernel(const RunConfig& cfg, int max_offset, bool* hit = nullptr) {
    kcq::QuadratureSpec quad{cfg.quad_n, cfg.quad_levels};
    const fs::path dir = resolve_cache_dir(cfg);
    kcq::KernelTable ker =
        kcq::load_or_build_kernel(dir, cfg.params.alpha, max_offset, quad, hit);
    if (cfg.quad_tol > 0.0 && ker.est_error > cfg.quad_tol) {
        throw std::runtime_error("kernel quadrature did not meet the requested tolerance: est_error=" +
                                 kcq::format_double(ker.est_error));
    }
    return ker;
}

int run_kernel(const RunConfig& cfg) {
    const int M = cfg.max_offset > 0 ? cfg.max_offset : 16;
    bool hit = false;
    const kcq::KernelTable ker = obtain_kernel(cfg, M, &hit);
    const fs::path path = kcq::kernel_cache_path(resolve_cache_dir(cfg), cfg.params.alpha, M,
                                                 cfg.quad_n);
    std::cout << "kernel alpha=" << kcq::format_double(ker.alpha) << " M=" << M
              << " quad_n=" << cfg.quad_n << (hit ? "  [cache hit]" : "  [built]") << "\n"
              << "  file       " << path.string() << "\n"
              << "  K_alpha    " << kcq::format_double(ker.k_alpha) << "\n"
              << "  R(0)       " << kcq::format_double(ker.value(0, 0, 0)) << "\n"
              << "  est_error  " << kcq::format_double(ker.est_error) << "\n"
              << "  min value  " << kcq::format_double(ker.min_table_value()) << "\n"
              << "  asymptotic ratio R(n e1) * n^(3-alpha):\n";
    for (int n = 2; n <= M; n *= 2) {
        std::cout << "    n=" << n << "  "
                  << kcq::format_double(ker.value(n, 0, 0) * std::pow(n, 3.0 - ker.alpha)) << "\n";
    }
    return 0;
}

int run_solve(const RunConfig& cfg_in, bool sign_changing) {
    RunConfig cfg = cfg_in;
    cfg.params.validate();
    if (sign_changing) cfg.params.validate_sign_changing();
    const kcq::BoxDomain dom = make_domain(cfg);
    const kcq::PotentialSpec spec = parse_potential(cfg.potential, dom);
    configure_init(cfg, dom, sign_changing);
    const int M = cfg.max_offset > 0 ? cfg.max_offset : std::max(1, dom.side - 1);
    if (M < dom.side - 1) throw std::invalid_argument("M must be at least L-1");
    const kcq::KernelTable ker = obtain_kernel(cfg, M);

    const auto [field, report] =
        sign_changing ? kcq::solve_sign_changing(cfg.params, spec, ker, dom, cfg.solve)
                      : kcq::solve_ground(cfg.params, spec, ker, dom, cfg.solve);

    fs::create_directories(cfg.out);
    kcq::save_field(fs::path(cfg.out) / "solution", field);
    {
        std::ofstream os(fs::path(cfg.out) / "report.json");
        os << kcq::report_to_json(report, resolved_config_json(cfg, dom, spec, M));
    }
    kcq::save_trace_csv(fs::path(cfg.out) / "trace.csv", report);

    std::cout << (sign_changing ? "solve-sc" : "solve") << " L=" << dom.side
              << " p=" << kcq::format_double(cfg.params.p)
              << " alpha=" << kcq::format_double(cfg.params.alpha) << "\n"
              << "  energy     " << kcq::format_double(report.energy) << "\n"
              << "  residual   " << kcq::format_double(report.residual_rel) << "\n"
              << "  iterations " << report.iterations << "\n"
              << "  sign counts +" << report.sign_counts.first << " / -"
              << report.sign_counts.second << "\n"
              << "  converged  " << (report.converged ? "yes" : "no");
    if (report.reseeds > 0) std::cout << "  (sign re-seeds: " << report.reseeds << ")";
    std::cout << "\n  outputs    " << cfg.out << "/{solution.json,solution.f64,report.json,trace.csv}"
              << "\n";
    if (report.reseeds > 0) {
        std::cout << "  note: a dying sign was re-seeded " << report.reseeds
                  << " time(s) from the initial pattern\n";
    }
    return report.converged ? 0 : 1;
}

int run_fiber(const RunConfig& cfg, const std::string& field_path) {
    const kcq::Field u = kcq::load_field(field_path);
    const kcq::BoxDomain dom = u.domain;
    const kcq::PotentialSpec spec = parse_potential(cfg.potential, dom);
    const int M = cfg.max_offset > 0 ? cfg.max_offset : std::max(1, dom.side - 1);
    RunConfig kcfg = cfg;
    kcfg.max_offset = M;
    const kcq::KernelTable ker = obtain_kernel(kcfg, M);

    // scale the grid to the ray projection so the curve brackets its maximum
    double s_hi = 10.0;
    try {
        s_hi = 2.0 * kcq::project_ray(kcq::fiber_coeffs(cfg.params, spec, ker, dom, u)).s_star;
    } catch (const std::invalid_argument&) {
        // zero or degenerate field: fall back to a fixed span
    }
    std::vector<double> grid{0.0};
    for (int i = 0; i <= 120; ++i) grid.push_back(s_hi * (i + 1) / 121.0);
    const auto curve = kcq::fiber_curve(cfg.params, spec, ker, dom, u, grid);
    fs::create_directories(cfg.out);
    {
        std::ofstream os(fs::path(cfg.out) / "fiber.csv");
        os << "s,energy,pairing\n";
        for (const auto& row : curve) {
            os << kcq::format_double(row.s) << "," << kcq::format_double(row.energy) << ","
               << kcq::format_double(row.pairing) << "\n";
        }
    }

    auto [up, um] = kcq::split_signs(u);
    const bool sign_changing =
        kcq::lp_norm(up, 2.0) > 0.0 && kcq::lp_norm(um, 2.0) > 0.0;
    if (sign_changing) {
        const kcq::SignCoeffs sc = kcq::sign_coeffs(cfg.params, spec, ker, dom, u);
        std::ofstream os(fs::path(cfg.out) / "pair_grid.csv");
        os << "s,t,f\n";
        for (int i = 0; i < 64; ++i) {
            const double s = std::pow(10.0, -2.0 + 4.0 * (i + 0.5) / 64.0);
            for (int j = 0; j < 64; ++j) {
                const double t = std::pow(10.0, -2.0 + 4.0 * (j + 0.5) / 64.0);
                os << kcq::format_double(s) << "," << kcq::format_double(t) << ","
                   << kcq::format_double(kcq::f_eval(sc, s, t)) << "\n";
            }
        }
        std::cout << "fiber: wrote " << cfg.out << "/fiber.csv and " << cfg.out
                  << "/pair_grid.csv\n";
    } else {
        std::cout << "fiber: wrote " << cfg.out << "/fiber.csv\n";
    }
    return 0;
}

int run_verify(const RunConfig& cfg) {
    kcq::VerifyOptions opt;
    opt.seed = cfg.solve.rng_seed;
    opt.alpha = cfg.params.alpha;
    opt.quad_n = cfg.quad_n;
    if (!cfg.kernel_cache.empty() || std::getenv("KC_CACHE_DIR")) {
        opt.cache_dir = resolve_cache_dir(cfg);
    }
    const auto checks = kcq::run_verification(opt);
    for (const auto& c : checks) {
        std::cout << (c.pass ? "[ ok ] " : "[FAIL] ") << c.name << "  residual="
                  << kcq::format_double(c.max_residual);
        if (std::isfinite(c.tolerance)) std::cout << "  tol=" << kcq::format_double(c.tolerance);
        if (!c.note.empty()) std::cout << "  (" << c.note << ")";
        std::cout << "\n";
    }
    fs::create_directories(cfg.out);
    {
        std::ofstream os(fs::path(cfg.out) / "verify.json");
        os << kcq::verification_to_json(opt, checks);
    }
    const bool ok = kcq::all_pass(checks);
    std::cout << (ok ? "all checks passed" : "CHECKS FAILED") << "; report at " << cfg.out
              << "/verify.json\n";
    return ok ? 0 : 1;
}

int run_sweep(const RunConfig& cfg, int l_min, int l_max, int l_step) {
    if (l_min < 1 || l_max < l_min || l_step < 1) {
        throw std::invalid_argument("sweep-L needs 1 <= L-min <= L-max and step >= 1");
    }
    fs::create_directories(cfg.out);
    std::ofstream os(fs::path(cfg.out) / "sweep.csv");
    os << "L,energy,residual_rel,iterations,converged\n";
    bool all_ok = true;
    for (int L = l_min; L <= l_max; L += l_step) {
        RunConfig c = cfg;
        c.box_L = L;
        c.origin.reset();
        const kcq::BoxDomain dom = make_domain(c);
        const kcq::PotentialSpec spec = parse_potential(c.potential, dom);
        configure_init(c, dom, false);
        const int M = std::max(1, L - 1);
        c.max_offset = M;
        const kcq::KernelTable ker = obtain_kernel(c, M);
        const auto [field, report] = kcq::solve_ground(c.params, spec, ker, dom, c.solve);
        os << L << "," << kcq::format_double(report.energy) << ","
           << kcq::format_double(report.residual_rel) << "," << report.iterations << ","
           << (report.converged ? 1 : 0) << "\n";
        std::cout << "L=" << L << "  J=" << kcq::format_double(report.energy)
                  << (report.converged ? "" : "  [not converged]") << "\n";
        all_ok = all_ok && report.converged;
    }
    std::cout << "sweep written to " << cfg.out << "/sweep.csv\n";
    return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete Kirchhoff-Choquard ground states on Z^3 boxes"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    std::string field_path;
    int l_min = 3, l_max = 9, l_step = 2;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config (a report's embedded config works too)");
        sub->add_option("--a", cfg.params.a, "Kirchhoff constant a > 0");
        sub->add_option("--b", cfg.params.b, "Kirchhoff constant b > 0");
        sub->add_option("--p", cfg.params.p, "nonlinearity exponent p > 2");
        sub->add_option("--alpha", cfg.params.alpha, "kernel order alpha in (0,3)");
        sub->add_option("--box", cfg.box_L, "box side length L");
        sub->add_option("--potential", cfg.potential,
                        "const:<h0> | periodic:<file> | coercive:<h0>,<slope>,center|x,y,z");
        sub->add_option("--quad-n", cfg.quad_n, "quadrature nodes per axis (finest level)");
        sub->add_option("--quad-levels", cfg.quad_levels, "refinement levels");
        sub->add_option("--quad-tol", cfg.quad_tol, "fail if est_error exceeds this (0 = off)");
        sub->add_option("--M", cfg.max_offset, "kernel offset radius (default: L-1)");
        sub->add_option("--kernel-cache", cfg.kernel_cache,
                        "kernel cache dir (default: $KC_CACHE_DIR or ./kc-cache)");
        sub->add_option("--tol", cfg.solve.tol_residual, "relative EL residual target");
        sub->add_option("--tol-nehari", cfg.solve.tol_nehari, "Nehari pairing tolerance");
        sub->add_option("--max-iter", cfg.solve.max_iters, "iteration cap");
        sub->add_option("--seed", cfg.solve.rng_seed, "RNG seed");
        sub->add_option("--step0", cfg.solve.step0, "initial gradient step");
        sub->add_option("--init", cfg.init, "bump | random | random-sign | file:<stem>");
        sub->add_option("--bump-width", cfg.bump_width, "init bump width");
        sub->add_option("--out", cfg.out, "output directory");
    };

    CLI::App* kernel = app.add_subcommand("kernel", "build or load a kernel table");
    add_common(kernel);
    CLI::App* solve = app.add_subcommand("solve", "compute a ground state");
    add_common(solve);
    CLI::App* solve_sc = app.add_subcommand("solve-sc", "compute a sign-changing ground state");
    add_common(solve_sc);
    CLI::App* fiber = app.add_subcommand("fiber", "sample the fiber map of a stored field");
    add_common(fiber);
    fiber->add_option("field", field_path, "field file stem or sidecar path")->required();
    CLI::App* verify = app.add_subcommand("verify", "run the identity/inequality suite");
    add_common(verify);
    CLI::App* sweep = app.add_subcommand("sweep-L", "ground solves over a range of box sides");
    add_common(sweep);
    sweep->add_option("--L-min", l_min, "smallest box side");
    sweep->add_option("--L-max", l_max, "largest box side");
    sweep->add_option("--L-step", l_step, "box side increment");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) {
            // layering: defaults < config file < explicit flags. Flags were
            // already applied, so re-apply only the ones the user passed.
            RunConfig from_file;
            std::ifstream is(config_path);
            if (!is) throw std::invalid_argument("cannot read config: " + config_path);
            json j;
            is >> j;
            apply_config_json(from_file, j);

            CLI::App* sub = app.get_subcommands().front();
            const auto passed = [&](const std::string& name) {
                const CLI::Option* o = sub->get_option_no_throw(name);
                return o != nullptr && o->count() > 0;
            };
            RunConfig merged = from_file;
            if (passed("--a")) merged.params.a = cfg.params.a;
            if (passed("--b")) merged.params.b = cfg.params.b;
            if (passed("--p")) merged.params.p = cfg.params.p;
            if (passed("--alpha")) merged.params.alpha = cfg.params.alpha;
            if (passed("--box")) { merged.box_L = cfg.box_L; merged.origin.reset(); }
            if (passed("--potential")) merged.potential = cfg.potential;
            if (passed("--quad-n")) merged.quad_n = cfg.quad_n;
            if (passed("--quad-levels")) merged.quad_levels = cfg.quad_levels;
            if (passed("--quad-tol")) merged.quad_tol = cfg.quad_tol;
            if (passed("--M")) merged.max_offset = cfg.max_offset;
            if (passed("--kernel-cache")) merged.kernel_cache = cfg.kernel_cache;
            if (passed("--tol")) merged.solve.tol_residual = cfg.solve.tol_residual;
            if (passed("--tol-nehari")) merged.solve.tol_nehari = cfg.solve.tol_nehari;
            if (passed("--max-iter")) merged.solve.max_iters = cfg.solve.max_iters;
            if (passed("--seed")) merged.solve.rng_seed = cfg.solve.rng_seed;
            if (passed("--step0")) merged.solve.step0 = cfg.solve.step0;
            if (passed("--init")) merged.init = cfg.init;
            if (passed("--bump-width")) merged.bump_width = cfg.bump_width;
            if (passed("--out")) merged.out = cfg.out;
            cfg = merged;
        }

        if (app.got_subcommand(kernel)) return run_kernel(cfg);
        if (app.got_subcommand(solve)) return run_solve(cfg, false);
        if (app.got_subcommand(solve_sc)) return run_solve(cfg, true);
        if (app.got_subcommand(fiber)) return run_fiber(cfg, field_path);
        if (app.got_subcommand(verify)) return run_verify(cfg);
        if (app.got_subcommand(sweep)) return run_sweep(cfg, l_min, l_max, l_step);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
