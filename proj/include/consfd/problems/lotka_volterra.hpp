#pragma once

#include <cmath>

#include "consfd/problem.hpp"

namespace consfd::problems {

/// Predator-prey system
///   x_t - x(a - b y) = 0,   y_t + y(c - d x) = 0,
/// with one conservation law psi = log(x^c y^a) - d x - b y. Rectangular
/// case s = 1 < m = 2: the multiplier row (c/x - d, a/y - b) is split into
/// the invertible block c/x - d and the sigma block a/y - b, with the second
/// equation kept as G.
///
/// States must stay in the open positive quadrant; the logarithms reject
/// anything else. The invertible block vanishes on the line x = c/d, so the
/// solver drives the conservative rows for this problem (SolverForm::
/// conservative), which stay regular across that line.
class LotkaVolterra final : public Problem {
public:
    explicit LotkaVolterra(Params p) : params_(std::move(p)) {
        a_ = params_.get_or("a", 1.0);
        b_ = params_.get_or("b", 1.0);
        c_ = params_.get_or("c", 1.0);
        d_ = params_.get_or("d", 1.0);
        if (!(a_ > 0.0 && b_ > 0.0 && c_ > 0.0 && d_ > 0.0))
            throw std::invalid_argument("lotka_volterra: a, b, c, d must be positive");
        params_.set("a", a_);
        params_.set("b", b_);
        params_.set("c", c_);
        params_.set("d", d_);
    }

    std::string_view name() const override { return "lotka_volterra"; }
    int num_equations() const override { return 2; }
    int num_conservation_laws() const override { return 1; }
    int spatial_dim() const override { return 0; }
    int time_levels() const override { return 2; }
    StencilSpec stencil() const override { return {.time_lo = -1, .time_hi = 0}; }
    const Params& params() const override { return params_; }
    SolverForm solver_form() const override { return SolverForm::conservative; }

    void discrete_density(const DiscreteView& v, SmallVec& out) const override {
        double x = v.u(0, 0), y = v.u(1, 0);
        require_positive(x, y);
        out = SmallVec(1);
        out[0] = c_ * std::log(x) + a_ * std::log(y) - d_ * x - b_ * y;
    }

    void discrete_multiplier(const DiscreteView& v, SmallMat& lambda, SmallMat& sigma) const override {
        double x = v.u(0, 0), y = v.u(1, 0);
        require_positive(x, y);
        lambda = SmallMat(1, 1);
        lambda(0, 0) = c_ / x - d_;
        sigma = SmallMat(1, 1);
        sigma(0, 0) = a_ / y - b_;
    }

    void discrete_g(const DiscreteView& v, SmallVec& out) const override {
        out = SmallVec(1);
        out[0] = (v.u(1, 0) - v.u(1, -1)) / v.tau() + v.u(1, 0) * (c_ - d_ * v.u(0, 0));
    }

    void density_time_derivative(const DiscreteView& v, SmallVec& out) const override {
        double x1 = v.u(0, 0), y1 = v.u(1, 0);
        double x0 = v.u(0, -1), y0 = v.u(1, -1);
        require_positive(x1, y1);
        require_positive(x0, y0);
        double tau = v.tau();
        // log(x1/x0) = log1p((x1-x0)/x0), relative-accurate for nearby levels
        out = SmallVec(1);
        out[0] = (c_ * std::log1p((x1 - x0) / x0) + a_ * std::log1p((y1 - y0) / y0) -
                  d_ * (x1 - x0) - b_ * (y1 - y0)) /
                 tau;
    }

    bool admissible(const DiscreteView& v) const override {
        return v.u(0, 0) > 0.0 && v.u(1, 0) > 0.0 && v.u(0, -1) > 0.0 && v.u(1, -1) > 0.0;
    }

    void continuous_system(const ContinuousPoint& p, SmallVec& F) const override {
        double x = p.u[0], y = p.u[1];
        F = SmallVec(2);
        F[0] = p.ut[0] - x * (a_ - b_ * y);
        F[1] = p.ut[1] + y * (c_ - d_ * x);
    }
    void continuous_multiplier(const ContinuousPoint& p, SmallMat& lambda) const override {
        lambda = SmallMat(1, 2);
        lambda(0, 0) = c_ / p.u[0] - d_;
        lambda(0, 1) = a_ / p.u[1] - b_;
    }
    void continuous_density(const ContinuousPoint& p, SmallVec& psi) const override {
        psi = SmallVec(1);
        psi[0] = c_ * std::log(p.u[0]) + a_ * std::log(p.u[1]) - d_ * p.u[0] - b_ * p.u[1];
    }

private:
    static void require_positive(double x, double y) {
        if (!(x > 0.0) || !(y > 0.0))
            throw InadmissibleStateError("lotka_volterra: state left the positive quadrant");
    }

    Params params_;
    double a_ = 1.0, b_ = 1.0, c_ = 1.0, d_ = 1.0;
};

}  // namespace consfd::problems
