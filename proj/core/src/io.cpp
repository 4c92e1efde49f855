#include "kcq/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace kcq {

namespace {

using nlohmann::json;

void write_f64le(std::ostream& os, const double* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(data[i]);
        char buf[8];
        for (int b = 0; b < 8; ++b) buf[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
        os.write(buf, 8);
    }
}

void read_f64le(std::istream& is, double* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        char buf[8];
        is.read(buf, 8);
        if (!is) throw std::ios_base::failure("truncated f64 block");
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[b])) << (8 * b);
        data[i] = std::bit_cast<double>(bits);
    }
}

std::ofstream open_out(const std::filesystem::path& p, std::ios::openmode mode) {
    std::ofstream os(p, mode);
    if (!os) throw std::ios_base::failure("cannot open for writing: " + p.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& p, std::ios::openmode mode) {
    std::ifstream is(p, mode);
    if (!is) throw std::ios_base::failure("cannot open for reading: " + p.string());
    return is;
}

}  // namespace

std::string format_double(double v) {
    // shortest representation that round-trips
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void save_field(const std::filesystem::path& stem, const Field& u) {
    json sidecar = {
        {"L", u.domain.side},
        {"origin", {u.domain.origin[0], u.domain.origin[1], u.domain.origin[2]}},
        {"dtype", "f64le"},
        {"order", "k-fastest"},
    };
    {
        auto os = open_out(std::filesystem::path(stem).concat(".json"), std::ios::out);
        os << sidecar.dump(2) << "\n";
    }
    auto os = open_out(std::filesystem::path(stem).concat(".f64"), std::ios::binary);
    write_f64le(os, u.values.data(), u.values.size());
}

Field load_field(const std::filesystem::path& path) {
    std::filesystem::path stem = path;
    const auto ext = stem.extension();
    if (ext == ".json" || ext == ".f64") stem.replace_extension();
    const auto sidecar_path = std::filesystem::path(stem).concat(".json");
    const auto block_path = std::filesystem::path(stem).concat(".f64");

    json sidecar;
    {
        auto is = open_in(sidecar_path, std::ios::in);
        is >> sidecar;
    }
    if (sidecar.value("dtype", "") != "f64le" || sidecar.value("order", "") != "k-fastest") {
        throw std::ios_base::failure("unsupported field file layout in " + sidecar_path.string());
    }
    BoxDomain dom;
    dom.side = sidecar.at("L").get<int>();
    if (dom.side < 1) throw std::ios_base::failure("field file has non-positive L");
    const auto& origin = sidecar.at("origin");
    for (int d = 0; d < 3; ++d) dom.origin[d] = origin.at(d).get<int>();

    Field u(dom);
    auto is = open_in(block_path, std::ios::binary);
    read_f64le(is, u.values.data(), u.values.size());
    char extra;
    if (is.read(&extra, 1)) throw std::ios_base::failure("field block longer than L^3 values");
    return u;
}

std::filesystem::path kernel_cache_path(const std::filesystem::path& dir, double alpha,
                                        int max_offset, int quad_n) {
    std::ostringstream name;
    name << "kernel_a" << format_double(alpha) << "_M" << max_offset << "_n" << quad_n << ".kc";
    return dir / name.str();
}

void save_kernel(const std::filesystem::path& path, const KernelTable& ker) {
    json header = {
        {"alpha", ker.alpha},
        {"K_alpha", ker.k_alpha},
        {"M", ker.max_offset},
        {"quad_n", ker.quad.nodes_per_axis},
        {"est_error", ker.est_error},
        {"version", 1},
    };
    auto os = open_out(path, std::ios::binary);
    os << header.dump() << "\n";
    write_f64le(os, ker.canonical.data(), ker.canonical.size());
}

KernelTable load_kernel(const std::filesystem::path& path) {
    auto is = open_in(path, std::ios::binary);
    std::string line;
    if (!std::getline(is, line)) throw std::ios_base::failure("missing kernel header: " + path.string());
    const json header = json::parse(line);
    if (header.value("version", 0) != 1) {
        throw std::ios_base::failure("unsupported kernel cache version in " + path.string());
    }
    KernelTable ker;
    ker.alpha = header.at("alpha").get<double>();
    ker.k_alpha = header.at("K_alpha").get<double>();
    ker.max_offset = header.at("M").get<int>();
    ker.quad.nodes_per_axis = header.at("quad_n").get<int>();
    ker.est_error = header.at("est_error").get<double>();
    if (ker.max_offset < 1) throw std::ios_base::failure("kernel cache has invalid M");
    ker.canonical.resize(KernelTable::canonical_size(ker.max_offset));
    read_f64le(is, ker.canonical.data(), ker.canonical.size());
    ker.expand();
    return ker;
}

KernelTable load_or_build_kernel(const std::filesystem::path& cache_dir, double alpha,
                                 int max_offset, const QuadratureSpec& quad, bool* hit) {
    const auto path = kernel_cache_path(cache_dir, alpha, max_offset, quad.nodes_per_axis);
    if (std::filesystem::exists(path)) {
        if (hit) *hit = true;
        return load_kernel(path);
    }
    if (hit) *hit = false;
    KernelTable ker = build_kernel(alpha, max_offset, quad);
    std::filesystem::create_directories(cache_dir);
    save_kernel(path, ker);
    return ker;
}

std::string report_to_json(const SolveReport& rep, const std::string& resolved_config_json) {
    json j = {
        {"energy", rep.energy},
        {"residual_rel", rep.residual_rel},
        {"nehari_residuals", rep.nehari_residuals},
        {"iterations", rep.iterations},
        {"energy_trace", rep.energy_trace},
        {"sign_counts", {rep.sign_counts.first, rep.sign_counts.second}},
        {"converged", rep.converged},
        {"reseeds", rep.reseeds},
        {"stop_reason", rep.stop_reason},
    };
    if (!resolved_config_json.empty()) {
        j["config"] = json::parse(resolved_config_json);
    }
    return j.dump(2) + "\n";
}

void save_trace_csv(const std::filesystem::path& path, const SolveReport& rep) {
    auto os = open_out(path, std::ios::out);
    os << "iter,energy,residual_rel\n";
    for (std::size_t i = 0; i < rep.energy_trace.size(); ++i) {
        os << i << "," << format_double(rep.energy_trace[i]) << ",";
        if (i < rep.residual_trace.size()) os << format_double(rep.residual_trace[i]);
        os << "\n";
    }
}

}  // namespace kcq
