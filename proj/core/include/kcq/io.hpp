// File formats: field files (JSON sidecar + raw little-endian f64 block),
// kernel cache files (JSON header line + canonical value block), solve
// reports (JSON) and iteration traces (CSV).
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kcq/green.hpp"
#include "kcq/lattice.hpp"
#include "kcq/solver.hpp"

namespace kcq {

/// Writes <stem>.json ({"L","origin","dtype":"f64le","order":"k-fastest"})
/// and <stem>.f64 (L^3 little-endian doubles, k-fastest).
void save_field(const std::filesystem::path& stem, const Field& u);

/// Accepts the stem, the .json sidecar path, or the .f64 path.
Field load_field(const std::filesystem::path& path);

/// Cache file name for a (alpha, max_offset, quad_n) key.
std::filesystem::path kernel_cache_path(const std::filesystem::path& dir, double alpha,
                                        int max_offset, int quad_n);

/// Single file: one JSON header line, then the canonical block (little-endian
/// f64, lexicographic canonical-offset order).
void save_kernel(const std::filesystem::path& path, const KernelTable& ker);
KernelTable load_kernel(const std::filesystem::path& path);

/// Loads the cached table if the keyed file exists, else builds and caches it.
/// `hit` reports which happened.
KernelTable load_or_build_kernel(const std::filesystem::path& cache_dir, double alpha,
                                 int max_offset, const QuadratureSpec& quad,
                                 bool* hit = nullptr);

/// Report JSON embedding the resolved run configuration under "config".
std::string report_to_json(const SolveReport& rep, const std::string& resolved_config_json);

/// CSV "iter,energy,residual_rel" — residual only known for the final row,
/// earlier rows carry the energy trace.
void save_trace_csv(const std::filesystem::path& path, const SolveReport& rep);

/// Format a double so it round-trips exactly.
std::string format_double(double v);

}  // namespace kcq
