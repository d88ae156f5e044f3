#pragma once

#include <cmath>

#include "consfd/problem.hpp"

namespace consfd::problems {

/// Korteweg-de Vries equation u_t + u u_x + u_xxx = 0 with multiplier
/// lambda = u, conserving psi = u^2/2 with flux
///   phi = u^3/3 + u u_xx - u_x^2 / 2.
/// The discrete flux uses forward differences inside the point value so that
/// the flux divergence telescopes to a pure third difference; the discrete
/// multiplier is the time average (u_n + u_{n-1})/2.
///
/// The multiplier vanishes on sign-flipping states and no limit form is
/// printed for it, so the simplified residual guards the time-average
/// denominator and rejects when it degenerates.
class Kdv final : public Problem {
public:
    explicit Kdv(Params p) : params_(std::move(p)) {}

    std::string_view name() const override { return "kdv"; }
    int num_equations() const override { return 1; }
    int num_conservation_laws() const override { return 1; }
    int spatial_dim() const override { return 1; }
    int time_levels() const override { return 2; }
    StencilSpec stencil() const override {
        return {.time_lo = -1, .time_hi = 0, .space_lo = {-2, 0}, .space_hi = {1, 0}};
    }
    const Params& params() const override { return params_; }

    void discrete_density(const DiscreteView& v, SmallVec& out) const override {
        out = SmallVec(1);
        double u = v.u(0, 0);
        out[0] = 0.5 * u * u;
    }

    void discrete_flux(const DiscreteView& v, SmallMat& out) const override {
        double h = v.h();
        double um = v.u(0, 0, -1), u0 = v.u(0, 0, 0), up = v.u(0, 0, 1);
        double dd = (up - u0) - (u0 - um);
        double fd = (up - u0) / h;
        out = SmallMat(1, 1);
        out(0, 0) = u0 * u0 * u0 / 3.0 + 0.5 * (up + u0) * dd / (h * h) - 0.5 * fd * fd;
    }

    void discrete_multiplier(const DiscreteView& v, SmallMat& lambda, SmallMat& sigma) const override {
        lambda = SmallMat(1, 1);
        lambda(0, 0) = 0.5 * (v.u(0, 0) + v.u(0, -1));
        sigma = SmallMat(1, 0);
    }

    void density_time_derivative(const DiscreteView& v, SmallVec& out) const override {
        double u1 = v.u(0, 0), u0 = v.u(0, -1);
        out = SmallVec(1);
        out[0] = (u1 - u0) * (u1 + u0) / (2.0 * v.tau());
    }

    void flux_divergence(const DiscreteView& v, SmallVec& out) const override {
        double h = v.h();
        double u0 = v.u(0, 0, 0), um1 = v.u(0, 0, -1);
        out = SmallVec(1);
        out[0] = power_sum(u0, um1, 3) * (u0 - um1) / (3.0 * h) +
                 0.5 * (u0 + um1) * third_difference(v) / (h * h * h);
    }

    bool has_simplified_residual() const override { return true; }
    void simplified_residual(const DiscreteView& v, SmallVec& out) const override {
        double denom = v.u(0, 0) + v.u(0, -1);
        double scale = std::max({std::abs(v.u(0, 0)), std::abs(v.u(0, -1)), 1.0});
        if (std::abs(denom) <= 2e6 * machine_eps * scale)
            throw SingularMultiplierError("kdv: time-averaged multiplier vanished");
        double h = v.h();
        double u0 = v.u(0, 0, 0), um1 = v.u(0, 0, -1);
        out = SmallVec(1);
        out[0] = (v.u(0, 0) - v.u(0, -1)) / v.tau() +
                 (2.0 * power_sum(u0, um1, 3) / (3.0 * denom)) * (u0 - um1) / h +
                 ((u0 + um1) / denom) * third_difference(v) / (h * h * h);
    }

    void continuous_system(const ContinuousPoint& p, SmallVec& F) const override {
        F = SmallVec(1);
        F[0] = p.ut[0] + p.u[0] * p.ux[0][0] + p.uxxx[0][0];
    }
    void continuous_multiplier(const ContinuousPoint& p, SmallMat& lambda) const override {
        lambda = SmallMat(1, 1);
        lambda(0, 0) = p.u[0];
    }
    void continuous_density(const ContinuousPoint& p, SmallVec& psi) const override {
        psi = SmallVec(1);
        psi[0] = 0.5 * p.u[0] * p.u[0];
    }
    void continuous_flux(const ContinuousPoint& p, SmallMat& phi) const override {
        phi = SmallMat(1, 1);
        phi(0, 0) = p.u[0] * p.u[0] * p.u[0] / 3.0 + p.u[0] * p.uxx[0][0] - 0.5 * p.ux[0][0] * p.ux[0][0];
    }

private:
    /// u_{j+1} - 3u_j + 3u_{j-1} - u_{j-2} assembled from first differences.
    static double third_difference(const DiscreteView& v) {
        double d1 = v.u(0, 0, 1) - v.u(0, 0, 0);
        double d2 = v.u(0, 0, 0) - v.u(0, 0, -1);
        double d3 = v.u(0, 0, -1) - v.u(0, 0, -2);
        return (d1 - d2) - (d2 - d3);
    }

    Params params_;
};

}  // namespace consfd::problems
