#pragma once

#include <cmath>

#include "consfd/problem.hpp"

namespace consfd::problems {

/// Non-dissipative Lorenz equations
///   x_t - sigma y = 0,   y_t - x(r - z) = 0,   z_t - x y = 0,
/// with two conserved densities z - x^2/(2 sigma) and y^2/2 + z^2/2 - r z.
/// Rectangular case s = 2 < m = 3 with the diagonal invertible block
/// diag(-(x_n+x_{n-1})/(2 sigma), (y_n+y_{n-1})/2).
///
/// The assembled scheme simplifies to the midpoint form below, which has no
/// divisions at all; it is used directly so that sign changes of x or y
/// (where the diagonal block degenerates) cost nothing.
class Lorenz final : public Problem {
public:
    explicit Lorenz(Params p) : params_(std::move(p)) {
        sigma_ = params_.get_or("sigma", 10.0);
        r_ = params_.get_or("r", 28.0);
        if (!(sigma_ > 0.0) || !(r_ > 0.0))
            throw std::invalid_argument("lorenz: sigma, r must be positive");
        params_.set("sigma", sigma_);
        params_.set("r", r_);
    }

    std::string_view name() const override { return "lorenz"; }
    int num_equations() const override { return 3; }
    int num_conservation_laws() const override { return 2; }
    int spatial_dim() const override { return 0; }
    int time_levels() const override { return 2; }
    StencilSpec stencil() const override { return {.time_lo = -1, .time_hi = 0}; }
    const Params& params() const override { return params_; }

    void discrete_density(const DiscreteView& v, SmallVec& out) const override {
        double x = v.u(0, 0), y = v.u(1, 0), z = v.u(2, 0);
        out = SmallVec(2);
        out[0] = z - x * x / (2.0 * sigma_);
        out[1] = 0.5 * y * y + 0.5 * z * z - r_ * z;
    }

    void discrete_multiplier(const DiscreteView& v, SmallMat& lambda, SmallMat& sigma) const override {
        lambda = SmallMat(2, 2);
        lambda(0, 0) = -(v.u(0, 0) + v.u(0, -1)) / (2.0 * sigma_);
        lambda(0, 1) = 0.0;
        lambda(1, 0) = 0.0;
        lambda(1, 1) = 0.5 * (v.u(1, 0) + v.u(1, -1));
        sigma = SmallMat(2, 1);
        sigma(0, 0) = 1.0;
        sigma(1, 0) = 0.5 * (v.u(2, 0) + v.u(2, -1)) - r_;
    }

    void discrete_g(const DiscreteView& v, SmallVec& out) const override {
        out = SmallVec(1);
        out[0] = (v.u(2, 0) - v.u(2, -1)) / v.tau() -
                 0.5 * (v.u(0, 0) + v.u(0, -1)) * 0.5 * (v.u(1, 0) + v.u(1, -1));
    }

    void density_time_derivative(const DiscreteView& v, SmallVec& out) const override {
        double tau = v.tau();
        double dx = v.u(0, 0) - v.u(0, -1), dy = v.u(1, 0) - v.u(1, -1), dz = v.u(2, 0) - v.u(2, -1);
        double sx = v.u(0, 0) + v.u(0, -1), sy = v.u(1, 0) + v.u(1, -1), sz = v.u(2, 0) + v.u(2, -1);
        out = SmallVec(2);
        out[0] = dz / tau - sx * dx / (2.0 * sigma_ * tau);
        out[1] = sy * dy / (2.0 * tau) + sz * dz / (2.0 * tau) - r_ * dz / tau;
    }

    bool has_simplified_residual() const override { return true; }
    void simplified_residual(const DiscreteView& v, SmallVec& out) const override {
        double tau = v.tau();
        double xm = 0.5 * (v.u(0, 0) + v.u(0, -1));
        double ym = 0.5 * (v.u(1, 0) + v.u(1, -1));
        double zm = 0.5 * (v.u(2, 0) + v.u(2, -1));
        out = SmallVec(3);
        out[0] = (v.u(0, 0) - v.u(0, -1)) / tau - sigma_ * ym;
        out[1] = (v.u(1, 0) - v.u(1, -1)) / tau - xm * (r_ - zm);
        out[2] = (v.u(2, 0) - v.u(2, -1)) / tau - xm * ym;
    }

    void continuous_system(const ContinuousPoint& p, SmallVec& F) const override {
        F = SmallVec(3);
        F[0] = p.ut[0] - sigma_ * p.u[1];
        F[1] = p.ut[1] - p.u[0] * (r_ - p.u[2]);
        F[2] = p.ut[2] - p.u[0] * p.u[1];
    }
    void continuous_multiplier(const ContinuousPoint& p, SmallMat& lambda) const override {
        lambda = SmallMat(2, 3);
        lambda(0, 0) = -p.u[0] / sigma_;
        lambda(0, 1) = 0.0;
        lambda(0, 2) = 1.0;
        lambda(1, 0) = 0.0;
        lambda(1, 1) = p.u[1];
        lambda(1, 2) = p.u[2] - r_;
    }
    void continuous_density(const ContinuousPoint& p, SmallVec& psi) const override {
        psi = SmallVec(2);
        psi[0] = p.u[2] - p.u[0] * p.u[0] / (2.0 * sigma_);
        psi[1] = 0.5 * p.u[1] * p.u[1] + 0.5 * p.u[2] * p.u[2] - r_ * p.u[2];
    }

private:
    Params params_;
    double sigma_ = 10.0, r_ = 28.0;
};

}  // namespace consfd::problems
