#pragma once

#include <cmath>

#include "consfd/problem.hpp"

namespace consfd::problems {

/// Two-dimensional shallow-water equations in non-dimensional form,
/// components ordered (u, v, eta):
///   u_t + u u_x + v u_y + eta_x = 0
///   v_t + u v_x + v v_y + eta_y = 0
///   eta_t + (eta u)_x + (eta v)_y = 0
/// conserving the momenta (eta u, eta v) and the mass eta. The multiplier is
/// upper triangular with time-averaged entries, so the per-point solve is a
/// short back substitution; it requires eta_n + eta_{n-1} bounded away from
/// zero, enforced through the admissibility predicate eta > 0.
class ShallowWater final : public Problem {
public:
    explicit ShallowWater(Params p) : params_(std::move(p)) {}

    std::string_view name() const override { return "shallow_water"; }
    int num_equations() const override { return 3; }
    int num_conservation_laws() const override { return 3; }
    int spatial_dim() const override { return 2; }
    int time_levels() const override { return 2; }
    StencilSpec stencil() const override {
        return {.time_lo = -1, .time_hi = 0, .space_lo = {-1, -1}, .space_hi = {0, 0}};
    }
    const Params& params() const override { return params_; }

    void discrete_density(const DiscreteView& v, SmallVec& out) const override {
        double u = v.u(0, 0, 0, 0), w = v.u(1, 0, 0, 0), eta = v.u(2, 0, 0, 0);
        out = SmallVec(3);
        out[0] = eta * u;
        out[1] = eta * w;
        out[2] = eta;
    }

    void discrete_flux(const DiscreteView& v, SmallMat& out) const override {
        double u = v.u(0, 0, 0, 0), w = v.u(1, 0, 0, 0), eta = v.u(2, 0, 0, 0);
        out = SmallMat(3, 2);
        out(0, 0) = eta * u * u + 0.5 * eta * eta;
        out(0, 1) = eta * u * w;
        out(1, 0) = eta * u * w;
        out(1, 1) = eta * w * w + 0.5 * eta * eta;
        out(2, 0) = eta * u;
        out(2, 1) = eta * w;
    }

    void discrete_multiplier(const DiscreteView& v, SmallMat& lambda, SmallMat& sigma) const override {
        double ubar = 0.5 * (v.u(0, 0, 0, 0) + v.u(0, -1, 0, 0));
        double vbar = 0.5 * (v.u(1, 0, 0, 0) + v.u(1, -1, 0, 0));
        double ebar = 0.5 * (v.u(2, 0, 0, 0) + v.u(2, -1, 0, 0));
        lambda = SmallMat(3, 3);
        lambda(0, 0) = ebar;
        lambda(0, 1) = 0.0;
        lambda(0, 2) = ubar;
        lambda(1, 0) = 0.0;
        lambda(1, 1) = ebar;
        lambda(1, 2) = vbar;
        lambda(2, 0) = 0.0;
        lambda(2, 1) = 0.0;
        lambda(2, 2) = 1.0;
        sigma = SmallMat(3, 0);
    }

    bool admissible(const DiscreteView& v) const override {
        return v.u(2, 0, 0, 0) > 0.0 && v.u(2, -1, 0, 0) > 0.0;
    }

    void continuous_system(const ContinuousPoint& p, SmallVec& F) const override {
        double u = p.u[0], w = p.u[1];
        F = SmallVec(3);
        F[0] = p.ut[0] + u * p.ux[0][0] + w * p.ux[0][1] + p.ux[2][0];
        F[1] = p.ut[1] + u * p.ux[1][0] + w * p.ux[1][1] + p.ux[2][1];
        F[2] = p.ut[2] + (p.ux[2][0] * u + p.u[2] * p.ux[0][0]) +
               (p.ux[2][1] * w + p.u[2] * p.ux[1][1]);
    }
    void continuous_multiplier(const ContinuousPoint& p, SmallMat& lambda) const override {
        lambda = SmallMat(3, 3);
        lambda(0, 0) = p.u[2];
        lambda(0, 1) = 0.0;
        lambda(0, 2) = p.u[0];
        lambda(1, 0) = 0.0;
        lambda(1, 1) = p.u[2];
        lambda(1, 2) = p.u[1];
        lambda(2, 0) = 0.0;
        lambda(2, 1) = 0.0;
        lambda(2, 2) = 1.0;
    }
    void continuous_density(const ContinuousPoint& p, SmallVec& psi) const override {
        psi = SmallVec(3);
        psi[0] = p.u[2] * p.u[0];
        psi[1] = p.u[2] * p.u[1];
        psi[2] = p.u[2];
    }
    void continuous_flux(const ContinuousPoint& p, SmallMat& phi) const override {
        double u = p.u[0], w = p.u[1], eta = p.u[2];
        phi = SmallMat(3, 2);
        phi(0, 0) = eta * u * u + 0.5 * eta * eta;
        phi(0, 1) = eta * u * w;
        phi(1, 0) = eta * u * w;
        phi(1, 1) = eta * w * w + 0.5 * eta * eta;
        phi(2, 0) = eta * u;
        phi(2, 1) = eta * w;
    }

private:
    Params params_;
};

}  // namespace consfd::problems
