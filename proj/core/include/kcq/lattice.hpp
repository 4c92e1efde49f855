// Finite box truncations of the Z^3 lattice and the discrete differential
// operators on them. Functions live on the box vertices; every edge leaving
// the box sees the value 0 on the outside (Dirichlet truncation).
#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace kcq {

using Coord = std::array<int, 3>;

/// Cubical truncation {origin + (i,j,k) : 0 <= i,j,k < side} of Z^3.
/// Linear indices run k-fastest: index = (i*side + j)*side + k.
struct BoxDomain {
    int side = 1;
    Coord origin{0, 0, 0};

    bool operator==(const BoxDomain&) const = default;

    std::int64_t vertex_count() const {
        const std::int64_t l = side;
        return l * l * l;
    }

    std::int64_t index_of(const Coord& x) const {
        const std::int64_t i = x[0] - origin[0];
        const std::int64_t j = x[1] - origin[1];
        const std::int64_t k = x[2] - origin[2];
        return (i * side + j) * side + k;
    }

    Coord coord_of(std::int64_t n) const {
        const int k = static_cast<int>(n % side);
        const int j = static_cast<int>((n / side) % side);
        const int i = static_cast<int>(n / (static_cast<std::int64_t>(side) * side));
        return {origin[0] + i, origin[1] + j, origin[2] + k};
    }

    bool contains(const Coord& x) const {
        for (int d = 0; d < 3; ++d) {
            if (x[d] < origin[d] || x[d] >= origin[d] + side) return false;
        }
        return true;
    }

    /// Box of side L with the lattice origin at (or next to) its center.
    static BoxDomain centered(int L) {
        const int o = -(L / 2);
        return BoxDomain{L, {o, o, o}};
    }
};

/// Real-valued function on a BoxDomain, stored in linear-index order.
struct Field {
    BoxDomain domain;
    std::vector<double> values;

    Field() = default;
    explicit Field(const BoxDomain& dom)
        : domain(dom), values(static_cast<std::size_t>(dom.vertex_count()), 0.0) {}

    double& operator[](std::size_t n) { return values[n]; }
    double operator[](std::size_t n) const { return values[n]; }
    std::size_t size() const { return values.size(); }

    double& at(const Coord& x) { return values[static_cast<std::size_t>(domain.index_of(x))]; }
    double at(const Coord& x) const { return values[static_cast<std::size_t>(domain.index_of(x))]; }
};

bool all_finite(const Field& u);

/// Graph Laplacian (Delta u)(x) = sum_{y~x} (u(y) - u(x)), exterior values 0.
Field laplacian(const BoxDomain& dom, const Field& u);

/// Pointwise gradient-form Gamma(u,v)(x) = 1/2 sum_{y~x} (u(y)-u(x))(v(y)-v(x)).
Field gamma(const BoxDomain& dom, const Field& u, const Field& v);

/// Gamma(u,u): the squared gradient length |grad u|^2 at each box vertex.
Field gradient_norm_sq(const BoxDomain& dom, const Field& u);

/// Integral of |grad u|^2 over all of Z^3, i.e. the sum of (u(y)-u(x))^2 over
/// every undirected edge touching the box (exterior endpoint value 0).
double dirichlet_energy(const BoxDomain& dom, const Field& u);

/// Same edge sum for the mixed form: sum over edges of (du)(dv).
/// gamma_total(dom, u, u) == dirichlet_energy(dom, u).
double gamma_total(const BoxDomain& dom, const Field& u, const Field& v);

/// (u+, u-) with u+ = max(u,0) >= 0, u- = min(u,0) <= 0, u+ + u- = u.
std::pair<Field, Field> split_signs(const Field& u);

/// Adjacency cross-term K_V(u) = sum_x sum_{y~x} [u+(x)u-(y) + u-(x)u+(y)].
/// Nonpositive for every field.
double k_v(const BoxDomain& dom, const Field& u);

/// Counting-measure l^q norm; q may be infinity. Throws for q < 1.
double lp_norm(const Field& u, double q);

}  // namespace kcq
