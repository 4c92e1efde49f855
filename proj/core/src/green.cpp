#include "kcq/green.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace kcq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_alpha(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 3.0)) {
        throw std::invalid_argument("alpha must lie in (0, 3)");
    }
}

void require_coverage(const KernelTable& ker, const BoxDomain& dom) {
    if (!ker.covers(dom)) {
        throw std::invalid_argument("kernel max_offset smaller than side-1: offsets not tabulated");
    }
}

// One midpoint level. Separable cosine contraction over the half grid
// m in [0, n/2)^3 (the other octants are identical because the integrand,
// after dropping the odd parts that cancel, is even per axis for integer z):
//   G(z) = 8/n^3 sum_m w(k_m) cos(z1 k_{m1}) cos(z2 k_{m2}) cos(z3 k_{m3}).
// Streams one m1-slice of w at a time; fixed loop order throughout.
std::vector<double> level_octant(double alpha, int M, int n) {
    const int h = n / 2;
    const int Z = M + 1;
    std::vector<double> nodes(h), cosz(static_cast<std::size_t>(Z) * h);
    for (int m = 0; m < h; ++m) nodes[m] = kTwoPi * (m + 0.5) / n;
    for (int z = 0; z < Z; ++z)
        for (int m = 0; m < h; ++m) cosz[static_cast<std::size_t>(z) * h + m] = std::cos(z * nodes[m]);

    std::vector<double> cosn(h);
    for (int m = 0; m < h; ++m) cosn[m] = std::cos(nodes[m]);

    std::vector<double> wslice(static_cast<std::size_t>(h) * h);
    std::vector<double> t1(static_cast<std::size_t>(h) * Z);
    // s2[m1][z2][z3]
    std::vector<double> s2(static_cast<std::size_t>(h) * Z * Z, 0.0);

    for (int m1 = 0; m1 < h; ++m1) {
        const double c1 = cosn[m1];
        for (int m2 = 0; m2 < h; ++m2) {
            const double c12 = c1 + cosn[m2];
            double* row = &wslice[static_cast<std::size_t>(m2) * h];
            for (int m3 = 0; m3 < h; ++m3) {
                const double m = 6.0 - 2.0 * (c12 + cosn[m3]);
                row[m3] = std::pow(m, -0.5 * alpha);
            }
        }
        // t1[m2][z3] = sum_m3 w[m2][m3] cos(z3 k_m3)
        for (int m2 = 0; m2 < h; ++m2) {
            const double* row = &wslice[static_cast<std::size_t>(m2) * h];
            for (int z3 = 0; z3 < Z; ++z3) {
                const double* cz = &cosz[static_cast<std::size_t>(z3) * h];
                double acc = 0.0;
                for (int m3 = 0; m3 < h; ++m3) acc += row[m3] * cz[m3];
                t1[static_cast<std::size_t>(m2) * Z + z3] = acc;
            }
        }
        // s2[m1][z2][z3] = sum_m2 t1[m2][z3] cos(z2 k_m2)
        double* s2m = &s2[static_cast<std::size_t>(m1) * Z * Z];
        for (int z2 = 0; z2 < Z; ++z2) {
            const double* cz = &cosz[static_cast<std::size_t>(z2) * h];
            for (int m2 = 0; m2 < h; ++m2) {
                const double c = cz[m2];
                const double* t1m = &t1[static_cast<std::size_t>(m2) * Z];
                double* out = &s2m[static_cast<std::size_t>(z2) * Z];
                for (int z3 = 0; z3 < Z; ++z3) out[z3] += c * t1m[z3];
            }
        }
    }

    // G[z1][z2][z3] = 8/n^3 sum_m1 s2[m1][z2][z3] cos(z1 k_m1)
    std::vector<double> oct(static_cast<std::size_t>(Z) * Z * Z, 0.0);
    const double scale = 8.0 / (static_cast<double>(n) * n * n);
    for (int z1 = 0; z1 < Z; ++z1) {
        const double* cz = &cosz[static_cast<std::size_t>(z1) * h];
        double* out = &oct[static_cast<std::size_t>(z1) * Z * Z];
        for (int m1 = 0; m1 < h; ++m1) {
            const double c = cz[m1];
            const double* s2m = &s2[static_cast<std::size_t>(m1) * Z * Z];
            for (int zz = 0; zz < Z * Z; ++zz) out[zz] += c * s2m[zz];
        }
        for (int zz = 0; zz < Z * Z; ++zz) out[zz] *= scale;
    }
    return oct;
}

double level_degree(double alpha, int n) {
    const int h = n / 2;
    std::vector<double> cosn(h);
    for (int m = 0; m < h; ++m) cosn[m] = std::cos(kTwoPi * (m + 0.5) / n);
    double acc = 0.0;
    for (int m1 = 0; m1 < h; ++m1) {
        for (int m2 = 0; m2 < h; ++m2) {
            const double c12 = cosn[m1] + cosn[m2];
            double inner = 0.0;
            for (int m3 = 0; m3 < h; ++m3) {
                inner += std::pow(6.0 - 2.0 * (c12 + cosn[m3]), 0.5 * alpha);
            }
            acc += inner;
        }
    }
    return acc * 8.0 / (static_cast<double>(n) * n * n);
}

void sort3_desc(int& a, int& b, int& c) {
    if (a < b) std::swap(a, b);
    if (b < c) std::swap(b, c);
    if (a < b) std::swap(a, b);
}

}  // namespace

double mu(const std::array<double, 3>& k) {
    return 6.0 - 2.0 * (std::cos(k[0]) + std::cos(k[1]) + std::cos(k[2]));
}

void QuadratureSpec::validate() const {
    if (refinement_levels < 1 || refinement_levels > 8) {
        throw std::invalid_argument("refinement_levels must be in [1, 8]");
    }
    int n = nodes_per_axis;
    for (int l = 1; l < refinement_levels; ++l) {
        if (n % 2 != 0) throw std::invalid_argument("nodes_per_axis must halve across refinement levels");
        n /= 2;
    }
    if (n < 8 || n % 2 != 0) {
        throw std::invalid_argument("nodes_per_axis must be even and >= 8 at the coarsest level");
    }
}

double fractional_degree(double alpha, const QuadratureSpec& quad) {
    require_alpha(alpha);
    quad.validate();
    return level_degree(alpha, quad.nodes_per_axis);
}

std::size_t KernelTable::canonical_size(int max_offset) {
    const std::size_t m = static_cast<std::size_t>(max_offset);
    return (m + 1) * (m + 2) * (m + 3) / 6;
}

std::size_t KernelTable::canonical_index(int i, int j, int k) {
    // i >= j >= k >= 0
    const std::size_t ii = static_cast<std::size_t>(i);
    const std::size_t jj = static_cast<std::size_t>(j);
    return ii * (ii + 1) * (ii + 2) / 6 + jj * (jj + 1) / 2 + static_cast<std::size_t>(k);
}

double KernelTable::value(int zx, int zy, int zz) const {
    const int x = std::abs(zx), y = std::abs(zy), z = std::abs(zz);
    if (x > max_offset || y > max_offset || z > max_offset) {
        throw std::invalid_argument("offset outside tabulated kernel radius");
    }
    const std::size_t Z = static_cast<std::size_t>(max_offset) + 1;
    return octant[(static_cast<std::size_t>(x) * Z + y) * Z + z];
}

double KernelTable::min_table_value() const {
    return *std::min_element(canonical.begin(), canonical.end());
}

void KernelTable::expand() {
    const int M = max_offset;
    const std::size_t Z = static_cast<std::size_t>(M) + 1;
    octant.assign(Z * Z * Z, 0.0);
    for (int i = 0; i <= M; ++i) {
        for (int j = 0; j <= M; ++j) {
            for (int k = 0; k <= M; ++k) {
                int a = i, b = j, c = k;
                sort3_desc(a, b, c);
                octant[(static_cast<std::size_t>(i) * Z + j) * Z + k] = canonical[canonical_index(a, b, c)];
            }
        }
    }
}

KernelTable build_kernel(double alpha, int max_offset, const QuadratureSpec& quad) {
    require_alpha(alpha);
    quad.validate();
    if (max_offset < 1) throw std::invalid_argument("max_offset must be >= 1");

    const int M = max_offset;
    const std::size_t Z = static_cast<std::size_t>(M) + 1;

    std::vector<int> levels(quad.refinement_levels);
    for (int l = 0; l < quad.refinement_levels; ++l) {
        levels[static_cast<std::size_t>(quad.refinement_levels - 1 - l)] = quad.nodes_per_axis >> l;
    }

    KernelTable ker;
    ker.alpha = alpha;
    ker.max_offset = M;
    ker.quad = quad;

    std::vector<double> prev_canonical;
    for (std::size_t li = 0; li < levels.size(); ++li) {
        const int n = levels[li];
        const std::vector<double> oct = level_octant(alpha, M, n);
        const double K = level_degree(alpha, n);
        std::vector<double> canon(KernelTable::canonical_size(M));
        for (int i = 0; i <= M; ++i)
            for (int j = 0; j <= i; ++j)
                for (int k = 0; k <= j; ++k)
                    canon[KernelTable::canonical_index(i, j, k)] =
                        K * oct[(static_cast<std::size_t>(i) * Z + j) * Z + k];
        if (li + 1 == levels.size()) {
            ker.k_alpha = K;
            ker.canonical = std::move(canon);
        } else {
            prev_canonical = std::move(canon);
        }
    }

    if (!prev_canonical.empty()) {
        double e = 0.0;
        for (std::size_t i = 0; i < ker.canonical.size(); ++i) {
            e = std::max(e, std::abs(ker.canonical[i] - prev_canonical[i]));
        }
        ker.est_error = e;
    }
    ker.expand();
    return ker;
}

bool check_symmetry(const KernelTable& ker) {
    const int M = ker.max_offset;
    const std::size_t Z = static_cast<std::size_t>(M) + 1;
    if (ker.octant.size() != Z * Z * Z ||
        ker.canonical.size() != KernelTable::canonical_size(M)) {
        return false;
    }
    for (int i = 0; i <= M; ++i) {
        for (int j = 0; j <= M; ++j) {
            for (int k = 0; k <= M; ++k) {
                int a = i, b = j, c = k;
                sort3_desc(a, b, c);
                const double v = ker.octant[(static_cast<std::size_t>(i) * Z + j) * Z + k];
                if (v != ker.canonical[KernelTable::canonical_index(a, b, c)]) return false;
            }
        }
    }
    return true;
}

Field convolve_direct(const KernelTable& ker, const BoxDomain& dom, const Field& w) {
    require_coverage(ker, dom);
    if (w.domain != dom) throw std::invalid_argument("field does not live on the given domain");
    const int L = dom.side;
    const std::size_t Z = static_cast<std::size_t>(ker.max_offset) + 1;
    Field out(dom);
    std::int64_t nx = 0;
    for (int xi = 0; xi < L; ++xi) {
        for (int xj = 0; xj < L; ++xj) {
            for (int xk = 0; xk < L; ++xk, ++nx) {
                double acc = 0.0;
                std::int64_t ny = 0;
                for (int yi = 0; yi < L; ++yi) {
                    const std::size_t di = static_cast<std::size_t>(std::abs(xi - yi));
                    for (int yj = 0; yj < L; ++yj) {
                        const std::size_t dij = (di * Z + static_cast<std::size_t>(std::abs(xj - yj))) * Z;
                        for (int yk = 0; yk < L; ++yk, ++ny) {
                            acc += ker.octant[dij + static_cast<std::size_t>(std::abs(xk - yk))] *
                                   w.values[static_cast<std::size_t>(ny)];
                        }
                    }
                }
                out.values[static_cast<std::size_t>(nx)] = acc;
            }
        }
    }
    return out;
}

namespace {

// FFTW planning is not thread safe; executions on distinct buffers are.
std::mutex g_fftw_mutex;

struct FftBuffers {
    int P;
    std::size_t real_count;
    std::size_t cplx_count;
    double* real = nullptr;
    fftw_complex* cplx = nullptr;
    fftw_plan fwd{};
    fftw_plan bwd{};

    explicit FftBuffers(int P_)
        : P(P_),
          real_count(static_cast<std::size_t>(P_) * P_ * P_),
          cplx_count(static_cast<std::size_t>(P_) * P_ * (P_ / 2 + 1)) {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        real = fftw_alloc_real(real_count);
        cplx = fftw_alloc_complex(cplx_count);
        fwd = fftw_plan_dft_r2c_3d(P, P, P, real, cplx, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_3d(P, P, P, cplx, real, FFTW_ESTIMATE);
    }
    ~FftBuffers() {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(cplx);
    }
    FftBuffers(const FftBuffers&) = delete;
    FftBuffers& operator=(const FftBuffers&) = delete;
};

}  // namespace

Field convolve_fft(const KernelTable& ker, const BoxDomain& dom, const Field& w) {
    require_coverage(ker, dom);
    if (w.domain != dom) throw std::invalid_argument("field does not live on the given domain");
    const int L = dom.side;
    // Offsets beyond L-1 cannot pair two box vertices, so crop the kernel.
    const int Mc = std::min(ker.max_offset, L - 1);
    const int P = L + Mc;  // >= 2*Mc+1, so the embedded kernel does not wrap onto itself
    const std::size_t Zk = static_cast<std::size_t>(ker.max_offset) + 1;

    FftBuffers fb(P);
    const std::size_t PP = static_cast<std::size_t>(P);
    const std::size_t cn = fb.cplx_count;

    // kernel transform
    std::fill(fb.real, fb.real + fb.real_count, 0.0);
    for (int i = -Mc; i <= Mc; ++i) {
        const std::size_t pi = static_cast<std::size_t>((i + P) % P);
        const std::size_t ai = static_cast<std::size_t>(std::abs(i));
        for (int j = -Mc; j <= Mc; ++j) {
            const std::size_t pj = static_cast<std::size_t>((j + P) % P);
            const std::size_t aij = (ai * Zk + static_cast<std::size_t>(std::abs(j))) * Zk;
            for (int k = -Mc; k <= Mc; ++k) {
                const std::size_t pk = static_cast<std::size_t>((k + P) % P);
                fb.real[(pi * PP + pj) * PP + pk] = ker.octant[aij + static_cast<std::size_t>(std::abs(k))];
            }
        }
    }
    fftw_execute(fb.fwd);
    std::vector<std::complex<double>> khat(cn);
    for (std::size_t i = 0; i < cn; ++i) khat[i] = {fb.cplx[i][0], fb.cplx[i][1]};

    // field transform
    std::fill(fb.real, fb.real + fb.real_count, 0.0);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j)
            for (int k = 0; k < L; ++k)
                fb.real[(static_cast<std::size_t>(i) * PP + static_cast<std::size_t>(j)) * PP +
                        static_cast<std::size_t>(k)] =
                    w.values[(static_cast<std::size_t>(i) * L + static_cast<std::size_t>(j)) * L +
                             static_cast<std::size_t>(k)];
    fftw_execute(fb.fwd);

    const double scale = 1.0 / (static_cast<double>(P) * P * P);
    for (std::size_t i = 0; i < cn; ++i) {
        const std::complex<double> prod =
            khat[i] * std::complex<double>{fb.cplx[i][0], fb.cplx[i][1]} * scale;
        fb.cplx[i][0] = prod.real();
        fb.cplx[i][1] = prod.imag();
    }
    fftw_execute(fb.bwd);

    Field out(dom);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j)
            for (int k = 0; k < L; ++k)
                out.values[(static_cast<std::size_t>(i) * L + static_cast<std::size_t>(j)) * L +
                           static_cast<std::size_t>(k)] =
                    fb.real[(static_cast<std::size_t>(i) * PP + static_cast<std::size_t>(j)) * PP +
                            static_cast<std::size_t>(k)];
    return out;
}

double choquard_pairing(const KernelTable& ker, const BoxDomain& dom,
                        const Field& w1, const Field& w2) {
    const Field conv = convolve_fft(ker, dom, w1);
    double acc = 0.0;
    for (std::size_t n = 0; n < conv.values.size(); ++n) acc += conv.values[n] * w2.values[n];
    return acc;
}

double hls_ratio(const KernelTable& ker, const BoxDomain& dom,
                 const Field& u, const Field& v, double r, double s) {
    if (!(r > 1.0) || !(s > 1.0)) throw std::invalid_argument("hls_ratio requires r, s in (1, inf)");
    const double rel = 1.0 / r + 1.0 / s + (3.0 - ker.alpha) / 3.0;
    if (std::abs(rel - 2.0) > 1e-9) {
        throw std::invalid_argument("exponents violate 1/r + 1/s + (3-alpha)/3 = 2");
    }
    Field au(u.domain), av(v.domain);
    for (std::size_t n = 0; n < u.values.size(); ++n) au.values[n] = std::abs(u.values[n]);
    for (std::size_t n = 0; n < v.values.size(); ++n) av.values[n] = std::abs(v.values[n]);
    const double nu = lp_norm(au, r), nv = lp_norm(av, s);
    if (nu == 0.0 || nv == 0.0) throw std::invalid_argument("hls_ratio requires nonzero fields");
    return choquard_pairing(ker, dom, au, av) / (nu * nv);
}

}  // namespace kcq
