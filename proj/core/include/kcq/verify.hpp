// Seeded self-verification suite: exact decomposition identities, inequality
// checks, kernel consistency, and projection certificates, all on reproducible
// random fields. The CLI `verify` subcommand serializes these results.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kcq/energy.hpp"

namespace kcq {

struct CheckResult {
    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool informational = false;  // measured quantity, never a failure by itself
    std::string note;
};

struct VerifyOptions {
    std::uint64_t seed = 1;
    double alpha = 2.0;
    int quad_n = 32;
    /// When set, kernels go through this cache and the cached file is
    /// cross-checked against a fresh coarse rebuild.
    std::optional<std::filesystem::path> cache_dir;
};

std::vector<CheckResult> run_verification(const VerifyOptions& opt);

bool all_pass(const std::vector<CheckResult>& checks);

/// JSON document with one entry per check plus the resolved options.
std::string verification_to_json(const VerifyOptions& opt, const std::vector<CheckResult>& checks);

}  // namespace kcq
