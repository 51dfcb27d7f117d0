#pragma once

// Pointwise (non-spatial) reaction terms of the biofilm electrophysiology
// model. Everything here is a pure function of a node state and the
// parameter set.

#include <algorithm>
#include <cmath>
#include <string>

#include "biofilm/types.hpp"

namespace biofilm::model {

/// exp and tanh arguments are clamped to this magnitude.
inline constexpr double kExponentClamp = 50.0;
/// Slack allowed on G_i <= G_m before the state counts as corrupted.
inline constexpr double kStateTolerance = 1e-6;

inline double clamp_exponent(double x) { return std::clamp(x, -kExponentClamp, kExponentClamp); }

inline void require_glutamate_headroom(double G_i, const Parameters& p, const char* where) {
    if (G_i > p.G_m + kStateTolerance)
        throw StateFault(std::string(where) + ": G_i=" + std::to_string(G_i) + " exceeds G_m");
}

/// Fraction of maximal glutamate uptake at membrane potential V.
inline double uptake_sigmoid(double V, const Parameters& p) {
    return 1.0 / (1.0 + std::exp(clamp_exponent(V - p.V_t)));
}

/// Glutamate moved from the medium into the cell, mM/hr.
inline double glutamate_uptake(double G_e, double G_i, double V, const Parameters& p) {
    require_glutamate_headroom(G_i, p, "glutamate_uptake");
    const double headroom = std::max(p.G_m - G_i, 0.0);
    return p.delta_G * uptake_sigmoid(V, p) * G_e * headroom;
}

/// Potassium-channel current g_K n^4 (V - V_K), mV/hr.
inline double potassium_channel_flux(double V, double n, double V_K, const Parameters& p) {
    const double n2 = n * n;
    return p.g_K * (n2 * n2) * (V - V_K);
}

/// Leak current g_L (V - V_L), mV/hr.
inline double leak_flux(double V, double V_L, const Parameters& p) { return p.g_L * (V - V_L); }

/// Active potassium import, mM/hr. Never negative.
inline double pump_rate(double K_e, double K_i, const Parameters& p) {
    return std::max(p.gamma_K * K_e * (p.K_m - K_i), 0.0);
}

/// Glutamate sufficiency term T_G.
inline double glutamate_drive(double G_i, const Parameters& p) { return G_i / (G_i + p.G_u); }

/// Voltage stress term T_V; large when the cell is hyperpolarized below V_l.
inline double voltage_stress(double V, const Parameters& p) {
    return p.eta_V * (std::tanh(clamp_exponent(p.gamma_V * (V / p.V_l - 1.0))) + 1.0);
}

/// Growth propensity M_g = T_G / (T_G + T_V), in [0, 1].
inline double growth_propensity(double G_i, double V, const Parameters& p) {
    const double tg = glutamate_drive(G_i, p);
    const double tv = voltage_stress(V, p);
    const double total = tg + tv;
    if (total <= 0.0) return 0.0;
    return tg / total;
}

/// Gate opening drive; rises as the cell runs out of glutamate.
inline double gate_opening_activation(double G_i, const Parameters& p) {
    require_glutamate_headroom(G_i, p, "gate_opening_activation");
    const double deficit = std::pow(std::max(p.G_m - G_i, 0.0), p.m);
    const double half = std::pow(p.G_m - p.G_l, p.m);
    return p.alpha * deficit / (half + deficit);
}

struct ReversalPotentials {
    double V_K;  // mV
    double V_L;  // mV
};

inline ReversalPotentials reversal_potentials(double K_e, double K_ac, const Parameters& p) {
    return {p.V_K0 + p.delta_K * K_e, p.V_L0 + p.delta_L * (K_e - K_ac)};
}

/// Reaction right-hand side at one node. dG_e and dK_e exclude diffusion
/// and sources.
///
/// The membrane terms are assembled once: dK_i is the exact negation of
/// dK_e and dV is dK_i / F, so exchange and voltage coupling hold bitwise.
inline NodeDerivative node_reaction_rhs(const NodeState& s, const Parameters& p) {
    const auto [V_K, V_L] = reversal_potentials(s.K_e, s.K_ac, p);
    const double uptake = glutamate_uptake(s.G_e, s.G_i, s.V, p);
    const double channel = potassium_channel_flux(s.V, s.n, V_K, p);
    const double leak = leak_flux(s.V, V_L, p);
    const double pump = pump_rate(s.K_e, s.K_i, p);
    const double consumption = p.gamma_G * s.G_i * (growth_propensity(s.G_i, s.V, p) + p.r_b);
    const double gate = gate_opening_activation(s.G_i, p);

    NodeDerivative d;
    d.dG_e = -uptake;
    d.dG_i = uptake - consumption;
    d.dK_e = p.F * (channel + leak) - pump;
    d.dK_i = -d.dK_e;
    d.dV = d.dK_i / p.F;
    d.dK_ac = p.eta_K * (s.K_e - s.K_ac);
    d.dn = gate * (1.0 - s.n) - p.beta * s.n;

    for (Field f : kAllFields) {
        if (!std::isfinite(get(d, f)))
            throw StateFault("node_reaction_rhs: non-finite d" + std::string(field_name(f)));
    }
    return d;
}

}  // namespace biofilm::model
