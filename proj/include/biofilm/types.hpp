#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biofilm/errors.hpp"

namespace biofilm {

/// Model constants. Time is in hours, length in mm, concentration in mM,
/// voltage in mV. Defaults are the published parameter set.
struct Parameters {
    double D_G = 0.540;     // mm^2/hr
    double D_K = 0.497;     // mm^2/hr
    double D_G_fl = 0.900;  // mm^2/hr, fluid phase
    double D_K_fl = 4.97;   // mm^2/hr, fluid phase
    double G_0 = 30.0;      // mM, far field
    double K_0 = 8.0;       // mM, far field
    double delta_G = 10.0;  // 1/(hr mM)
    double V_t = -150.0;    // mV
    double G_m = 20.0;      // mM
    double F = 5.6;         // mM/mV
    double g_K = 180.0;     // 1/hr
    double g_L = 1.2;       // 1/hr
    double gamma_K = 0.025; // 1/(hr mM)
    double K_m = 300.0;     // mM
    double L_b = 0.5;       // mm
    double gamma_G = 1.125; // 1/hr
    double r_b = 0.1;
    double G_u = 18.0;      // mM
    double eta_V = 20.0;
    double gamma_V = 20.0;
    double V_l = -175.0;    // mV
    double delta_g = 0.0075;  // mm/(mM hr)
    double eta_K = 30.0;    // 1/hr
    double alpha = 5.0;     // 1/hr
    double beta = 2.5;      // 1/hr
    double m = 2.0;
    double G_l = 10.0;      // mM
    double V_K0 = -380.0;   // mV
    double V_L0 = -156.0;   // mV
    double delta_K = 1.0;   // mV/mM
    double delta_L = 60.0;  // mV/mM

    bool operator==(const Parameters&) const = default;
};

/// Checks the documented parameter invariants. The two "default set sanity"
/// orderings (K_m > K_0, V_l < V_t) can be waived with `allow_unusual`.
inline void validate(const Parameters& p, bool allow_unusual = false) {
    const std::pair<const char*, double> positive[] = {
        {"D_G", p.D_G},         {"D_K", p.D_K},       {"D_G_fl", p.D_G_fl},
        {"D_K_fl", p.D_K_fl},   {"G_0", p.G_0},       {"K_0", p.K_0},
        {"delta_G", p.delta_G}, {"G_m", p.G_m},       {"F", p.F},
        {"g_K", p.g_K},         {"g_L", p.g_L},       {"gamma_K", p.gamma_K},
        {"K_m", p.K_m},         {"L_b", p.L_b},       {"gamma_G", p.gamma_G},
        {"r_b", p.r_b},         {"G_u", p.G_u},       {"eta_V", p.eta_V},
        {"gamma_V", p.gamma_V}, {"delta_g", p.delta_g}, {"eta_K", p.eta_K},
        {"alpha", p.alpha},     {"beta", p.beta},     {"G_l", p.G_l},
        {"delta_K", p.delta_K}, {"delta_L", p.delta_L},
    };
    for (const auto& [name, value] : positive) {
        if (!std::isfinite(value) || value <= 0.0)
            throw ValidationError(std::string("parameters.") + name, "must be finite and > 0");
    }
    for (const auto& [name, value] : {std::pair{"V_t", p.V_t}, std::pair{"V_l", p.V_l},
                                      std::pair{"V_K0", p.V_K0}, std::pair{"V_L0", p.V_L0}}) {
        if (!std::isfinite(value))
            throw ValidationError(std::string("parameters.") + name, "must be finite");
    }
    if (!(p.G_l < p.G_u && p.G_u < p.G_m))
        throw ValidationError("parameters.G_u", "requires G_l < G_u < G_m");
    if (!(p.m >= 1.0) || !std::isfinite(p.m))
        throw ValidationError("parameters.m", "must be >= 1");
    if (!allow_unusual) {
        if (std::floor(p.m) != p.m)
            throw ValidationError("parameters.m", "must be integer-valued (set allow_unusual to override)");
        if (!(p.K_m > p.K_0))
            throw ValidationError("parameters.K_m", "must exceed K_0 (set allow_unusual to override)");
        if (!(p.V_l < p.V_t))
            throw ValidationError("parameters.V_l", "must be below V_t (set allow_unusual to override)");
    }
}

/// State of the cells and extracellular medium at one grid node.
struct NodeState {
    double G_e = 0.0;   // mM
    double K_e = 0.0;   // mM
    double G_i = 0.0;   // mM
    double K_i = 0.0;   // mM
    double K_ac = 0.0;  // mM
    double V = 0.0;     // mV
    double n = 0.0;

    bool operator==(const NodeState&) const = default;
};

/// Time derivative of a NodeState (reaction part only for dG_e and dK_e
/// when produced by the pointwise model).
struct NodeDerivative {
    double dG_e = 0.0;
    double dK_e = 0.0;
    double dG_i = 0.0;
    double dK_i = 0.0;
    double dK_ac = 0.0;
    double dV = 0.0;
    double dn = 0.0;
};

struct BiofilmState {
    std::vector<NodeState> nodes;
    double L = 0.0;  // mm
    double t = 0.0;  // hr
};

/// Initial condition used by every experiment.
inline NodeState initial_node_state() {
    return {.G_e = 30.0, .K_e = 8.0, .G_i = 20.0, .K_i = 300.0, .K_ac = 9.0, .V = -156.0, .n = 0.1};
}

enum class Field { G_e, K_e, G_i, K_i, K_ac, V, n };

inline constexpr std::array<Field, 7> kAllFields = {Field::G_e, Field::K_e, Field::G_i, Field::K_i,
                                                    Field::K_ac, Field::V, Field::n};

inline constexpr std::string_view field_name(Field f) {
    switch (f) {
        case Field::G_e: return "G_e";
        case Field::K_e: return "K_e";
        case Field::G_i: return "G_i";
        case Field::K_i: return "K_i";
        case Field::K_ac: return "K_ac";
        case Field::V: return "V";
        case Field::n: return "n";
    }
    return "?";
}

inline constexpr std::string_view field_unit(Field f) {
    switch (f) {
        case Field::V: return "mV";
        case Field::n: return "1";
        default: return "mM";
    }
}

inline std::optional<Field> parse_field(std::string_view name) {
    for (Field f : kAllFields)
        if (field_name(f) == name) return f;
    return std::nullopt;
}

inline double get(const NodeState& s, Field f) {
    switch (f) {
        case Field::G_e: return s.G_e;
        case Field::K_e: return s.K_e;
        case Field::G_i: return s.G_i;
        case Field::K_i: return s.K_i;
        case Field::K_ac: return s.K_ac;
        case Field::V: return s.V;
        case Field::n: return s.n;
    }
    return 0.0;
}

inline double& get(NodeState& s, Field f) {
    switch (f) {
        case Field::G_e: return s.G_e;
        case Field::K_e: return s.K_e;
        case Field::G_i: return s.G_i;
        case Field::K_i: return s.K_i;
        case Field::K_ac: return s.K_ac;
        case Field::V: return s.V;
        case Field::n: break;
    }
    return s.n;
}

inline double get(const NodeDerivative& d, Field f) {
    switch (f) {
        case Field::G_e: return d.dG_e;
        case Field::K_e: return d.dK_e;
        case Field::G_i: return d.dG_i;
        case Field::K_i: return d.dK_i;
        case Field::K_ac: return d.dK_ac;
        case Field::V: return d.dV;
        case Field::n: return d.dn;
    }
    return 0.0;
}

}  // namespace biofilm
