#pragma once

#include <cmath>
#include <optional>

#include "consfd/linalg.hpp"
#include "consfd/problem.hpp"

namespace consfd::scheme {

/// Guard for near-singular discrete multipliers. The threshold is
/// 1e6 * eps * lambda-scale, where the scale is the largest multiplier
/// magnitude seen over the current step (floored at 1 so that a first
/// evaluation at an exact zero is still caught).
struct GuardContext {
    double factor = 1e6;
    double scale_floor = 1.0;
    double lambda_scale = 0.0;

    void observe(double magnitude) { lambda_scale = std::max(lambda_scale, magnitude); }
    double threshold() const {
        return factor * machine_eps * std::max(lambda_scale, scale_floor);
    }
};

struct Diagnostics {
    double multiplier_inverse_norm = 0.0;  // running max of ||Lambda^-1||_inf
    double multiplier_norm = 0.0;          // running max of ||Lambda||_inf
    bool limit_branch_taken = false;

    void observe_inverse(double inv_norm) {
        multiplier_inverse_norm = std::max(multiplier_inverse_norm, inv_norm);
    }
    void observe_norm(double norm) { multiplier_norm = std::max(multiplier_norm, norm); }
};

enum class Route {
    automatic,  // use the problem's simplified residual when it has one
    generic,    // always assemble through the multiplier solve
};

/// (psi at k - psi at k-1)/tau, componentwise.
inline SmallVec discrete_time_derivative(const Problem& p, const DiscreteView& v) {
    SmallVec out;
    p.density_time_derivative(v, out);
    return out;
}

/// sum_i (phi^{ji} at J - phi^{ji} at J-e_i)/h per conservation law j.
inline SmallVec discrete_flux_divergence(const Problem& p, const DiscreteView& v) {
    SmallVec out;
    p.flux_divergence(v, out);
    return out;
}

/// D_t psi + D_x . Phi (- Sigma G in the rectangular case). Equals
/// Lambda * assembled residual identically. When `g_out` is given it
/// receives the trailing G rows.
inline SmallVec conservative_form_residual(const Problem& p, const DiscreteView& v,
                                           SmallVec* g_out = nullptr) {
    SmallVec rhs = discrete_time_derivative(p, v);
    if (p.spatial_dim() > 0) {
        SmallVec div = discrete_flux_divergence(p, v);
        for (int j = 0; j < rhs.size(); ++j) rhs[j] += div[j];
    }
    int extra = p.num_equations() - p.num_conservation_laws();
    if (extra > 0) {
        SmallMat lambda, sigma;
        p.discrete_multiplier(v, lambda, sigma);
        SmallVec g;
        p.discrete_g(v, g);
        for (int j = 0; j < rhs.size(); ++j)
            for (int c = 0; c < extra; ++c) rhs[j] -= sigma(j, c) * g[c];
        if (g_out) *g_out = g;
    } else if (g_out) {
        *g_out = SmallVec(0);
    }
    return rhs;
}

/// Scalar case: (lambda)^{-1} (D_t psi + D_x . phi) with the zero-compatible
/// limit branch below the guard threshold.
inline double assemble_scalar_residual(const Problem& p, const DiscreteView& v, GuardContext& guard,
                                       Diagnostics* diag = nullptr) {
    SmallMat lambda, sigma;
    p.discrete_multiplier(v, lambda, sigma);
    double lam = lambda(0, 0);
    guard.observe(std::abs(lam));
    if (diag) diag->observe_norm(std::abs(lam));
    if (std::abs(lam) > guard.threshold()) {
        if (diag) diag->observe_inverse(1.0 / std::abs(lam));
        SmallVec rhs = discrete_time_derivative(p, v);
        if (p.spatial_dim() > 0) {
            SmallVec div = discrete_flux_divergence(p, v);
            rhs[0] += div[0];
        }
        return rhs[0] / lam;
    }
    if (const ZeroCompat* zc = p.zero_compat()) {
        if (diag) diag->limit_branch_taken = true;
        return zc->limit(v);
    }
    throw SingularMultiplierError("unguarded singular multiplier in scalar assembly");
}

/// Square and rectangular cases share one core: solve
///   Lambda~ F~ = D_t psi + D_x . Phi - Sigma G
/// by a pivoted dense factorization per point and stack (F~, G).
inline SmallVec assemble_partitioned_residual(const Problem& p, const DiscreteView& v,
                                              GuardContext& guard, Diagnostics* diag = nullptr) {
    int m = p.num_equations();
    int s = p.num_conservation_laws();
    SmallMat lambda, sigma;
    p.discrete_multiplier(v, lambda, sigma);
    SmallVec g;
    SmallVec rhs = discrete_time_derivative(p, v);
    if (p.spatial_dim() > 0) {
        SmallVec div = discrete_flux_divergence(p, v);
        for (int j = 0; j < s; ++j) rhs[j] += div[j];
    }
    if (m > s) {
        p.discrete_g(v, g);
        for (int j = 0; j < s; ++j)
            for (int c = 0; c < m - s; ++c) rhs[j] -= sigma(j, c) * g[c];
    }

    double norm = lambda.inf_norm();
    guard.observe(norm);
    if (diag) diag->observe_norm(norm);
    SmallLU lu;
    bool ok = lu.factor(lambda);
    if (!ok || lu.min_pivot() <= guard.threshold())
        throw SingularMultiplierError("singular or near-singular multiplier block at a mesh point");
    if (diag) diag->observe_inverse(lu.inverse_inf_norm());

    SmallVec ftilde = lu.solve(rhs);
    SmallVec out(m);
    for (int j = 0; j < s; ++j) out[j] = ftilde[j];
    for (int c = 0; c < m - s; ++c) out[s + c] = g[c];
    return out;
}

/// Square system (s == m) residual via the per-point factorization.
inline SmallVec assemble_system_residual(const Problem& p, const DiscreteView& v,
                                         GuardContext& guard, Diagnostics* diag = nullptr) {
    if (p.num_equations() != p.num_conservation_laws())
        throw std::logic_error("assemble_system_residual requires s == m");
    return assemble_partitioned_residual(p, v, guard, diag);
}

/// Rectangular (s < m, also valid at s == m where it reduces exactly to the
/// square assembly) residual: the stacked (F~, G).
inline SmallVec assemble_rectangular_residual(const Problem& p, const DiscreteView& v,
                                              GuardContext& guard, Diagnostics* diag = nullptr) {
    return assemble_partitioned_residual(p, v, guard, diag);
}

/// The assembled multiplier-method residual (m components). The automatic
/// route uses the problem's simplified closed form when one exists; it is
/// algebraically identical to the generic assembly and regular across
/// removable multiplier zeros.
inline SmallVec residual(const Problem& p, const DiscreteView& v, GuardContext& guard,
                         Diagnostics* diag = nullptr, Route route = Route::automatic) {
    if (route == Route::automatic && p.has_simplified_residual()) {
        SmallVec out;
        p.simplified_residual(v, out);
        return out;
    }
    if (p.num_equations() == 1 && p.num_conservation_laws() == 1) {
        SmallVec out(1);
        out[0] = assemble_scalar_residual(p, v, guard, diag);
        return out;
    }
    return assemble_partitioned_residual(p, v, guard, diag);
}

/// Conditioning probe at a point: ||Lambda~^{-1}||_inf and ||Lambda~||_inf,
/// +inf on exact singularity. Never throws.
struct ConditionProbe {
    double inverse_norm = 0.0;
    double norm = 0.0;
};

inline ConditionProbe multiplier_condition(const Problem& p, const DiscreteView& v) {
    SmallMat lambda, sigma;
    p.discrete_multiplier(v, lambda, sigma);
    ConditionProbe probe;
    // Row norm of the full [Lambda~ | Sigma] multiplier.
    for (int r = 0; r < lambda.rows; ++r) {
        double rowsum = 0.0;
        for (int c = 0; c < lambda.cols; ++c) rowsum += std::abs(lambda(r, c));
        for (int c = 0; c < sigma.cols; ++c) rowsum += std::abs(sigma(r, c));
        probe.norm = std::max(probe.norm, rowsum);
    }
    if (lambda.rows == 1) {
        double lam = std::abs(lambda(0, 0));
        probe.inverse_norm = lam > 0.0 ? 1.0 / lam : std::numeric_limits<double>::infinity();
        return probe;
    }
    SmallLU lu;
    if (!lu.factor(lambda) || lu.min_pivot() == 0.0) {
        probe.inverse_norm = std::numeric_limits<double>::infinity();
        return probe;
    }
    probe.inverse_norm = lu.inverse_inf_norm();
    return probe;
}

}  // namespace consfd::scheme
