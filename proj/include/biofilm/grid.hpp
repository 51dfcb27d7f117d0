#pragma once

// Uniform finite-difference grid over the growing domain [0, L].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "biofilm/model.hpp"
#include "biofilm/types.hpp"

namespace biofilm {

struct Grid {
    double dx = 0.05;         // mm
    std::size_t n_nodes = 3;
    double L = 0.12;          // mm

    double x(std::size_t i) const { return static_cast<double>(i) * dx; }
};

/// Relative slack used when deciding whether L sits on a grid line.
inline constexpr double kGridLineSlack = 1e-9;

/// floor(L/dx) + 1, with L landing a rounding error short of a grid line
/// counted as on it.
inline std::size_t node_count(double L, double dx) {
    return static_cast<std::size_t>(std::floor(L / dx + kGridLineSlack)) + 1;
}

inline Grid make_grid(double dx, double L) {
    if (!(dx > 0.0) || !std::isfinite(dx)) throw ValidationError("grid.dx", "must be > 0");
    if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("grid.initial_L", "must be > 0");
    const std::size_t n = node_count(L, dx);
    if (n < 3) throw ValidationError("grid.initial_L", "must span at least 3 nodes (L >= 2 dx)");
    return {dx, n, L};
}

/// Exchange condition with the surrounding fluid at the outer edge.
struct BoundarySpec {
    double D_interior;  // mm^2/hr
    double D_fluid;     // mm^2/hr
    double L_b;         // mm
    double far_field;   // mM
};

inline BoundarySpec glutamate_boundary(const Parameters& p) { return {p.D_G, p.D_G_fl, p.L_b, p.G_0}; }
inline BoundarySpec potassium_boundary(const Parameters& p) { return {p.D_K, p.D_K_fl, p.L_b, p.K_0}; }

/// Second difference of `field` with a mirror (zero-flux) ghost at x = 0 and
/// a ghost at the outer node chosen so the centered gradient carries the
/// boundary-layer flux (D_fluid / L_b)(far_field - f_N) / D_interior.
/// Writes into `out` (same length as field).
inline void laplacian_with_bcs(std::span<const double> field, const Grid& g, const BoundarySpec& b,
                               std::span<double> out) {
    const std::size_t n = field.size();
    if (n != g.n_nodes || out.size() != n || n < 2)
        throw StateFault("laplacian_with_bcs: field length does not match grid");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(field[i]))
            throw StateFault("laplacian_with_bcs: non-finite value at node " + std::to_string(i));
    }
    const double dx = g.dx;
    out[0] = (2.0 * field[1] - 2.0 * field[0]) / dx / dx;
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i] = (field[i - 1] - 2.0 * field[i] + field[i + 1]) / dx / dx;
    const std::size_t last = n - 1;
    const double ghost = field[last - 1] + (2.0 * dx * b.D_fluid) / (b.D_interior * b.L_b) *
                                               (b.far_field - field[last]);
    out[last] = (field[last - 1] - 2.0 * field[last] + ghost) / dx / dx;
}

inline std::vector<double> laplacian_with_bcs(std::span<const double> field, const Grid& g,
                                              const BoundarySpec& b) {
    std::vector<double> out(field.size());
    laplacian_with_bcs(field, g, b, out);
    return out;
}

/// Trapezoid rule over the nodes plus the partial cell from the last node to
/// L, using the linear extrapolation of the last two nodes to L.
inline double integrate_to_length(std::span<const double> values, const Grid& g, double L,
                                  bool nonnegative = false) {
    const std::size_t n = values.size();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) sum += 0.5 * (values[i] + values[i + 1]);
    sum *= g.dx;
    const double tail = L - g.x(n - 1);
    if (tail > 0.0 && n >= 2) {
        const double slope = (values[n - 1] - values[n - 2]) / g.dx;
        double at_L = values[n - 1] + slope * tail;
        if (nonnegative) at_L = std::max(at_L, 0.0);
        sum += 0.5 * (values[n - 1] + at_L) * tail;
    }
    return sum;
}

/// dL/dt = delta_g * integral over [0, L] of G_i M_g.
inline double growth_rate(std::span<const double> G_i, std::span<const double> M_g, const Grid& g,
                          double L, const Parameters& p) {
    if (G_i.size() != g.n_nodes || M_g.size() != g.n_nodes)
        throw StateFault("growth_rate: field length does not match grid");
    std::vector<double> integrand(G_i.size());
    for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] = G_i[i] * M_g[i];
    return p.delta_g * integrate_to_length(integrand, g, L, true);
}

inline double growth_rate(std::span<const double> G_i, std::span<const double> M_g, const Grid& g,
                          const Parameters& p) {
    return growth_rate(G_i, M_g, g, g.L, p);
}

/// Appends one node per grid line crossed since the grid was last sized.
/// New nodes copy the previous outermost node.
inline void extend_domain_in_place(BiofilmState& state, Grid& g) {
    if (state.L < g.L) throw StateFault("extend_domain: biofilm length decreased");
    const std::size_t target = node_count(state.L, g.dx);
    if (state.nodes.empty()) throw StateFault("extend_domain: empty state");
    const NodeState edge = state.nodes.back();
    while (state.nodes.size() < target) state.nodes.push_back(edge);
    g.n_nodes = state.nodes.size();
    g.L = state.L;
}

inline std::pair<BiofilmState, Grid> extend_domain(BiofilmState state, Grid g) {
    extend_domain_in_place(state, g);
    return {std::move(state), g};
}

}  // namespace biofilm
