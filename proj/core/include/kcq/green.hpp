// Green's function R_alpha of the discrete fractional Laplacian on Z^3,
// tabulated over a cube of offsets by midpoint-tensor quadrature of its
// torus-integral definition, plus the convolution engine built on it.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "kcq/lattice.hpp"

namespace kcq {

/// Symbol mu(k) = 6 - 2 sum_j cos(k_j) of the lattice Laplacian, k in [0,2pi]^3.
double mu(const std::array<double, 3>& k);

/// Tensor-midpoint quadrature on the torus: nodes 2*pi*(m+1/2)/n per axis.
/// The midpoint shift keeps every node away from the k = 0 singularity.
struct QuadratureSpec {
    int nodes_per_axis = 128;
    int refinement_levels = 2;

    void validate() const;
    bool operator==(const QuadratureSpec&) const = default;
};

/// Fractional degree K_alpha = (2pi)^-3 int_{T^3} mu(k)^{alpha/2} dk.
/// Equals 6 at alpha = 2 and tends to 1 as alpha -> 0.
double fractional_degree(double alpha, const QuadratureSpec& quad);

/// Tabulated R_alpha(z) for |z_i| <= max_offset.
///
/// `canonical` holds one value per sign-and-permutation orbit (sorted
/// descending triples i >= j >= k >= 0, lexicographic); `octant` is the dense
/// (M+1)^3 expansion used for lookups. The expansion is a pure copy of the
/// canonical entries, so all 48 signed permutations of an offset read the
/// identical bits.
struct KernelTable {
    double alpha = 0.0;
    double k_alpha = 0.0;
    int max_offset = 0;
    QuadratureSpec quad;
    double est_error = 0.0;

    std::vector<double> canonical;
    std::vector<double> octant;

    static std::size_t canonical_size(int max_offset);
    /// Position of the orbit representative (i >= j >= k >= 0).
    static std::size_t canonical_index(int i, int j, int k);

    bool covers(const BoxDomain& dom) const { return max_offset >= dom.side - 1; }

    /// R_alpha(z); coordinates may have any sign. Throws if |z_i| > max_offset.
    double value(int zx, int zy, int zz) const;

    double min_table_value() const;

    /// Rebuild `octant` from `canonical` (bit-exact symmetry by construction).
    void expand();
};

/// Tabulate R_alpha(z) = K_alpha (2pi)^-3 int cos(z.k) mu(k)^{-alpha/2} dk for
/// all |z_i| <= max_offset. The quadrature runs at refinement_levels dyadic
/// node counts ending at quad.nodes_per_axis; the table keeps the finest level
/// and est_error = max |finest - previous| over the canonical set.
/// Requires 0 < alpha < 3 (the singularity mu^{-alpha/2} is integrable there).
KernelTable build_kernel(double alpha, int max_offset, const QuadratureSpec& quad);

/// True when every octant entry is bit-identical to its orbit representative.
bool check_symmetry(const KernelTable& ker);

/// Exact O(N^2) discrete convolution (R_alpha * w)(x) = sum_y R(x-y) w(y),
/// deterministic summation order. Requires max_offset >= side-1.
Field convolve_direct(const KernelTable& ker, const BoxDomain& dom, const Field& w);

/// Same linear convolution restricted to the box, via zero-padded cyclic FFT.
Field convolve_fft(const KernelTable& ker, const BoxDomain& dom, const Field& w);

/// sum_x (R_alpha * w1)(x) w2(x); symmetric in (w1, w2) since the kernel is even.
double choquard_pairing(const KernelTable& ker, const BoxDomain& dom,
                        const Field& w1, const Field& w2);

/// pairing(|u|,|v|) / (||u||_r ||v||_s) for exponents with
/// 1/r + 1/s + (3-alpha)/3 = 2. Scale-invariant in both arguments.
double hls_ratio(const KernelTable& ker, const BoxDomain& dom,
                 const Field& u, const Field& v, double r, double s);

}  // namespace kcq
