#pragma once

// Independent reference evaluations of the model formulas and random-state
// generators shared by the unit and acceptance suites. The reference is
// written from the formulas directly, in long double, without calling any
// library code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "biofilm/types.hpp"

namespace oracle {

using R = long double;

inline R clamp50(R a) { return a < -50 ? R(-50) : (a > 50 ? R(50) : a); }

inline R sigmoid(R V, const biofilm::Parameters& p) { return 1 / (1 + std::exp(clamp50(V - p.V_t))); }

inline R uptake(R G_e, R G_i, R V, const biofilm::Parameters& p) {
    return R(p.delta_G) * sigmoid(V, p) * G_e * (R(p.G_m) - G_i);
}

inline R channel(R V, R n, R V_K, const biofilm::Parameters& p) { return R(p.g_K) * n * n * n * n * (V - V_K); }

inline R leak(R V, R V_L, const biofilm::Parameters& p) { return R(p.g_L) * (V - V_L); }

inline R pump(R K_e, R K_i, const biofilm::Parameters& p) {
    const R raw = R(p.gamma_K) * K_e * (R(p.K_m) - K_i);
    return raw > 0 ? raw : R(0);
}

inline R T_G(R G_i, const biofilm::Parameters& p) { return G_i / (G_i + R(p.G_u)); }

inline R T_V(R V, const biofilm::Parameters& p) {
    return R(p.eta_V) * (std::tanh(clamp50(R(p.gamma_V) * (V / R(p.V_l) - 1))) + 1);
}

inline R M_g(R G_i, R V, const biofilm::Parameters& p) {
    const R tg = T_G(G_i, p), tv = T_V(V, p);
    return tg + tv == 0 ? R(0) : tg / (tg + tv);
}

inline R gate(R G_i, const biofilm::Parameters& p) {
    const R deficit = std::pow(R(p.G_m) - G_i, R(p.m));
    return R(p.alpha) * deficit / (std::pow(R(p.G_m) - R(p.G_l), R(p.m)) + deficit);
}

inline R V_K(R K_e, const biofilm::Parameters& p) { return R(p.V_K0) + R(p.delta_K) * K_e; }
inline R V_L(R K_e, R K_ac, const biofilm::Parameters& p) { return R(p.V_L0) + R(p.delta_L) * (K_e - K_ac); }

/// Reference right-hand side plus, per field, the sum of absolute term
/// magnitudes (the scale against which cancellation error is judged).
struct Rhs {
    R dG_e, dK_e, dG_i, dK_i, dK_ac, dV, dn;
    R sG_e, sK_e, sG_i, sK_i, sK_ac, sV, sn;
};

inline Rhs rhs(const biofilm::NodeState& s, const biofilm::Parameters& p) {
    const R vk = V_K(s.K_e, p), vl = V_L(s.K_e, s.K_ac, p);
    const R U = uptake(s.G_e, s.G_i, s.V, p);
    const R ch = channel(s.V, s.n, vk, p);
    const R lk = leak(s.V, vl, p);
    const R P = pump(s.K_e, s.K_i, p);
    const R cons = R(p.gamma_G) * R(s.G_i) * (M_g(s.G_i, s.V, p) + R(p.r_b));
    const R F = p.F;
    const R gt = gate(s.G_i, p) * (1 - R(s.n)), close = R(p.beta) * R(s.n);
    const R mem_scale = F * (std::abs(ch) + std::abs(lk)) + std::abs(P);
    // Channel and leak each carry a difference of two potentials.
    const R pot_scale = F * (R(p.g_K) * std::pow(R(s.n), 4) * (std::abs(R(s.V)) + std::abs(vk)) +
                             R(p.g_L) * (std::abs(R(s.V)) + std::abs(vl))) + std::abs(P);
    const R kscale = std::max(mem_scale, pot_scale);
    return {-U,
            F * (ch + lk) - P,
            U - cons,
            -F * (ch + lk) + P,
            R(p.eta_K) * (R(s.K_e) - R(s.K_ac)),
            -ch - lk + P / F,
            gt - close,
            std::abs(U),
            kscale,
            std::abs(U) + std::abs(cons),
            kscale,
            R(p.eta_K) * (std::abs(R(s.K_e)) + std::abs(R(s.K_ac))),
            kscale / F,
            std::abs(gt) + std::abs(close)};
}

}  // namespace oracle

namespace testing_support {

/// Relative error of `got` against `want`, with `scale` guarding against
/// cancellation in sums whose result is much smaller than their terms.
inline double rel_error(long double got, long double want, long double scale = 0) {
    const long double denom = std::max({std::abs(want), scale, static_cast<long double>(1e-300)});
    return static_cast<double>(std::abs(got - want) / denom);
}

/// Random node state within physical ranges.
template <class Rng>
biofilm::NodeState random_state(Rng& rng, const biofilm::Parameters& p) {
    auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    biofilm::NodeState s;
    s.G_e = u(0.0, 60.0);
    s.K_e = u(0.0, 100.0);
    s.G_i = u(0.0, p.G_m);
    s.K_i = u(0.0, 400.0);
    s.K_ac = u(0.0, 100.0);
    s.V = u(-400.0, 0.0);
    s.n = u(0.0, 1.0);
    return s;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    const std::filesystem::path dir = std::filesystem::path(BIOFILM_TEST_TMP) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing_support
