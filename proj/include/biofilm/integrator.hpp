#pragma once

// Method-of-lines time stepping: the spatial operator from grid.hpp plus the
// pointwise model, advanced with classical fourth-order Runge-Kutta.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biofilm/grid.hpp"
#include "biofilm/model.hpp"
#include "biofilm/signals.hpp"
#include "biofilm/types.hpp"

namespace biofilm {

/// What the post-step projection does with a negative concentration.
enum class BoundsPolicy {
    /// Clamp violations within kConcentrationSlack, fault beyond it.
    strict,
    /// Clamp any negative concentration to zero. Blow-ups, n outside [0, 1]
    /// and G_i above G_m still fault.
    project,
};

inline constexpr std::string_view bounds_policy_name(BoundsPolicy b) {
    return b == BoundsPolicy::strict ? "strict" : "project";
}

struct StepControl {
    double dt = 1e-3;           // hr
    double cfl_safety = 0.9;
    double t_end = 20.0;        // hr
    double record_every = 0.01; // hr
    BoundsPolicy bounds = BoundsPolicy::strict;

    bool operator==(const StepControl&) const = default;
};

/// Largest explicit diffusion step for this grid and parameter set.
inline double cfl_limit(double dx, const Parameters& p) {
    return dx * dx / (2.0 * std::max(p.D_G, p.D_K));
}

inline void validate(const StepControl& s, double dx, const Parameters& p) {
    if (!(s.cfl_safety > 0.0 && s.cfl_safety <= 1.0))
        throw ValidationError("step.cfl_safety", "must lie in (0, 1]");
    if (!(s.dt > 0.0) || !std::isfinite(s.dt)) throw ValidationError("step.dt", "must be > 0");
    const double limit = s.cfl_safety * cfl_limit(dx, p);
    if (s.dt > limit)
        throw ValidationError("step.dt", "exceeds the diffusion stability bound " + std::to_string(limit) +
                                             " hr for dx=" + std::to_string(dx) + " mm");
    if (!(s.t_end >= 0.0) || !std::isfinite(s.t_end)) throw ValidationError("step.t_end", "must be >= 0");
    if (!(s.record_every > 0.0)) throw ValidationError("step.record_every", "must be > 0");
}

/// Everything the right-hand side needs besides the state itself.
struct RhsContext {
    const Parameters& params;
    const InputSignal& glutamate;
    const InputSignal& potassium;
    SourceMode source_mode = SourceMode::concentration;
};

struct StateDerivative {
    std::vector<NodeDerivative> nodes;
    double dL = 0.0;  // mm/hr
};

/// Full right-hand side with the x = 0 source rates given explicitly.
inline StateDerivative full_rhs(const BiofilmState& state, const Grid& g, const Parameters& p,
                                double glutamate_rate, double potassium_rate,
                                SourceMode mode = SourceMode::concentration) {
    const std::size_t n = state.nodes.size();
    if (n != g.n_nodes) throw StateFault("full_rhs: state does not match grid");

    std::vector<double> G_e(n), K_e(n), G_i(n), M_g(n);
    for (std::size_t i = 0; i < n; ++i) {
        const NodeState& s = state.nodes[i];
        G_e[i] = s.G_e;
        K_e[i] = s.K_e;
        G_i[i] = s.G_i;
        M_g[i] = model::growth_propensity(s.G_i, s.V, p);
    }
    std::vector<double> lap_G(n), lap_K(n);
    laplacian_with_bcs(G_e, g, glutamate_boundary(p), lap_G);
    laplacian_with_bcs(K_e, g, potassium_boundary(p), lap_K);

    StateDerivative d;
    d.nodes.resize(n);
    std::vector<double> source_G(n, 0.0), source_K(n, 0.0);
    apply_delta_source(source_G, g, glutamate_rate, mode);
    apply_delta_source(source_K, g, potassium_rate, mode);

    for (std::size_t i = 0; i < n; ++i) {
        NodeDerivative nd;
        try {
            nd = model::node_reaction_rhs(state.nodes[i], p);
        } catch (const StateFault& e) {
            throw StateFault("node " + std::to_string(i) + ": " + e.what());
        }
        nd.dG_e += p.D_G * lap_G[i] + source_G[i];
        nd.dK_e += p.D_K * lap_K[i] + source_K[i];
        if (!std::isfinite(nd.dG_e)) throw StateFault("node " + std::to_string(i) + ": non-finite dG_e");
        if (!std::isfinite(nd.dK_e)) throw StateFault("node " + std::to_string(i) + ": non-finite dK_e");
        d.nodes[i] = nd;
    }
    d.dL = growth_rate(G_i, M_g, g, state.L, p);
    return d;
}

/// Full right-hand side at time t, with sources taken from the signals.
inline StateDerivative full_rhs(const BiofilmState& state, double t, const RhsContext& ctx, const Grid& g) {
    return full_rhs(state, g, ctx.params, continuous_rate(ctx.glutamate, t), continuous_rate(ctx.potassium, t),
                    ctx.source_mode);
}

namespace detail {

inline NodeState advance(const NodeState& s, const NodeDerivative& d, double h) {
    return {s.G_e + h * d.dG_e, s.K_e + h * d.dK_e, s.G_i + h * d.dG_i, s.K_i + h * d.dK_i,
            s.K_ac + h * d.dK_ac, s.V + h * d.dV, s.n + h * d.dn};
}

inline BiofilmState advance(const BiofilmState& s, const StateDerivative& d, double h) {
    BiofilmState out;
    out.nodes.resize(s.nodes.size());
    for (std::size_t i = 0; i < s.nodes.size(); ++i) out.nodes[i] = advance(s.nodes[i], d.nodes[i], h);
    out.L = s.L + h * d.dL;
    out.t = s.t + h;
    return out;
}

inline double rk4_combine(double y, double k1, double k2, double k3, double k4, double h) {
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace detail

/// Concentration slack below zero that is clamped rather than faulted.
inline constexpr double kConcentrationSlack = 1e-6;
/// Slack on n outside [0, 1].
inline constexpr double kGateSlack = 1e-9;
/// Any field beyond this magnitude means the step size is too large.
inline constexpr double kBlowUpMagnitude = 1e9;

/// Post-step projection onto the physical state space. Under the strict
/// policy, faults when a concentration violation exceeds round-off.
inline void enforce_bounds(BiofilmState& state, const Parameters& p,
                           BoundsPolicy policy = BoundsPolicy::strict) {
    auto concentration = [&](double& v, std::size_t i, const char* name) {
        if (v >= 0.0) return;
        if (policy == BoundsPolicy::strict && v < -kConcentrationSlack)
            throw StabilityFault(state.t, std::string(name) + "=" + std::to_string(v) + " < 0 at node " +
                                              std::to_string(i) + " (dt too large?)");
        v = 0.0;
    };
    for (std::size_t i = 0; i < state.nodes.size(); ++i) {
        NodeState& s = state.nodes[i];
        for (Field f : kAllFields) {
            const double v = get(s, f);
            if (!std::isfinite(v) || std::abs(v) > kBlowUpMagnitude)
                throw StabilityFault(state.t, std::string(field_name(f)) + " blew up at node " + std::to_string(i) +
                                                  " (dt too large?)");
        }
        concentration(s.G_e, i, "G_e");
        concentration(s.K_e, i, "K_e");
        concentration(s.G_i, i, "G_i");
        concentration(s.K_i, i, "K_i");
        concentration(s.K_ac, i, "K_ac");
        if (s.G_i > p.G_m) {
            if (s.G_i > p.G_m + kConcentrationSlack)
                throw StabilityFault(state.t, "G_i exceeds G_m at node " + std::to_string(i));
            s.G_i = p.G_m;
        }
        if (s.n < -kGateSlack || s.n > 1.0 + kGateSlack)
            throw StabilityFault(state.t, "n=" + std::to_string(s.n) + " left [0, 1] at node " + std::to_string(i));
        s.n = std::clamp(s.n, 0.0, 1.0);
    }
}

/// One classical RK4 step of length dt with the x = 0 source rates held at
/// the given values. Callers land steps on signal breakpoints so the rates
/// are constant over the step. Grows the grid when L crosses a grid line.
///
/// A model fault raised while evaluating a stage is reported as a
/// StabilityFault: stage states only leave the model's domain when dt is too
/// large for the current dynamics.
inline BiofilmState rk4_step(const BiofilmState& state, double dt, Grid& g, const Parameters& p,
                             double glutamate_rate, double potassium_rate,
                             SourceMode mode = SourceMode::concentration,
                             BoundsPolicy policy = BoundsPolicy::strict) {
    StateDerivative k1, k2, k3, k4;
    try {
        k1 = full_rhs(state, g, p, glutamate_rate, potassium_rate, mode);
        k2 = full_rhs(detail::advance(state, k1, 0.5 * dt), g, p, glutamate_rate, potassium_rate, mode);
        k3 = full_rhs(detail::advance(state, k2, 0.5 * dt), g, p, glutamate_rate, potassium_rate, mode);
        k4 = full_rhs(detail::advance(state, k3, dt), g, p, glutamate_rate, potassium_rate, mode);
    } catch (const StateFault& e) {
        throw StabilityFault(state.t, std::string(e.what()) + " (dt too large?)");
    }

    BiofilmState next;
    next.t = state.t + dt;
    next.L = detail::rk4_combine(state.L, k1.dL, k2.dL, k3.dL, k4.dL, dt);
    next.nodes.resize(state.nodes.size());
    for (std::size_t i = 0; i < state.nodes.size(); ++i) {
        const NodeState& s = state.nodes[i];
        const NodeDerivative &a = k1.nodes[i], &b = k2.nodes[i], &c = k3.nodes[i], &d = k4.nodes[i];
        next.nodes[i] = {detail::rk4_combine(s.G_e, a.dG_e, b.dG_e, c.dG_e, d.dG_e, dt),
                         detail::rk4_combine(s.K_e, a.dK_e, b.dK_e, c.dK_e, d.dK_e, dt),
                         detail::rk4_combine(s.G_i, a.dG_i, b.dG_i, c.dG_i, d.dG_i, dt),
                         detail::rk4_combine(s.K_i, a.dK_i, b.dK_i, c.dK_i, d.dK_i, dt),
                         detail::rk4_combine(s.K_ac, a.dK_ac, b.dK_ac, c.dK_ac, d.dK_ac, dt),
                         detail::rk4_combine(s.V, a.dV, b.dV, c.dV, d.dV, dt),
                         detail::rk4_combine(s.n, a.dn, b.dn, c.dn, d.dn, dt)};
    }
    if (!std::isfinite(next.L) || next.L < state.L)
        throw StabilityFault(next.t, "biofilm length decreased or became non-finite");
    enforce_bounds(next, p, policy);
    extend_domain_in_place(next, g);
    return next;
}

/// RK4 step taking source rates from the signals. The rate is sampled at the
/// step midpoint, which is exact for piecewise-constant signals as long as
/// the step does not straddle a breakpoint.
inline BiofilmState rk4_step(const BiofilmState& state, double dt, const RhsContext& ctx, Grid& g,
                             BoundsPolicy policy = BoundsPolicy::strict) {
    const double mid = state.t + 0.5 * dt;
    return rk4_step(state, dt, g, ctx.params, continuous_rate(ctx.glutamate, mid),
                    continuous_rate(ctx.potassium, mid), ctx.source_mode, policy);
}

}  // namespace biofilm
