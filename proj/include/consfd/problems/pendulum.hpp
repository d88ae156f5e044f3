#pragma once

#include <cmath>

#include "consfd/problem.hpp"

namespace consfd::problems {

/// Pendulum angle equation theta_tt + (g/l) sin(theta) = 0 with the energy
/// multiplier lambda = theta_t.
///
/// Discrete pair:
///   psi^tau_n    = ((theta_{n+1}-theta_n)/tau)^2 / 2
///                  - (g/2l)(cos theta_{n+1} + cos theta_n)
///   lambda^tau_n = (theta_{n+1}-theta_{n-1}) / (2 tau)
/// The assembled scheme evaluates the cosine difference quotient through the
/// product identity cos a - cos b = -2 sin((a+b)/2) sin((a-b)/2), which keeps
/// it finite and accurate through the multiplier's zero (zero-compatible of
/// order one).
class Pendulum final : public Problem {
public:
    explicit Pendulum(Params p) : params_(std::move(p)) {
        g_ = params_.get_or("g", 1.0);
        l_ = params_.get_or("l", 1.0);
        if (!(g_ > 0.0) || !(l_ > 0.0)) throw std::invalid_argument("pendulum: g, l must be positive");
        params_.set("g", g_);
        params_.set("l", l_);
        zc_.order = 1;
        double gl = g_ / l_;
        zc_.limit = [gl](const DiscreteView& v) {
            double tau = v.tau();
            return 2.0 * (v.u(0, -1) - v.u(0, 0)) / (tau * tau) + gl * std::sin(v.u(0, -1));
        };
    }

    std::string_view name() const override { return "pendulum"; }
    int num_equations() const override { return 1; }
    int num_conservation_laws() const override { return 1; }
    int spatial_dim() const override { return 0; }
    int time_levels() const override { return 3; }
    StencilSpec stencil() const override { return {.time_lo = -1, .time_hi = 1}; }
    const Params& params() const override { return params_; }

    void discrete_density(const DiscreteView& v, SmallVec& out) const override {
        double tau = v.tau();
        double dp = (v.u(0, 1) - v.u(0, 0)) / tau;
        out = SmallVec(1);
        out[0] = 0.5 * dp * dp - (g_ / (2.0 * l_)) * (std::cos(v.u(0, 1)) + std::cos(v.u(0, 0)));
    }

    void discrete_multiplier(const DiscreteView& v, SmallMat& lambda, SmallMat& sigma) const override {
        lambda = SmallMat(1, 1);
        lambda(0, 0) = (v.u(0, 1) - v.u(0, -1)) / (2.0 * v.tau());
        sigma = SmallMat(1, 0);
    }

    void density_time_derivative(const DiscreteView& v, SmallVec& out) const override {
        double tau = v.tau();
        double tp = v.u(0, 1), t0 = v.u(0, 0), tm = v.u(0, -1);
        double dd = (tp - t0) - (t0 - tm);
        double half_diff = 0.5 * (tp - tm);
        double mid = 0.5 * (tp + tm);
        out = SmallVec(1);
        // (tp-tm) dd / (2 tau^3) - (g/2l tau)(cos tp - cos tm), difference-first
        out[0] = half_diff * dd / (tau * tau * tau) +
                 (g_ / l_) * std::sin(mid) * std::sin(half_diff) / tau;
    }

    bool has_simplified_residual() const override { return true; }
    void simplified_residual(const DiscreteView& v, SmallVec& out) const override {
        double tau = v.tau();
        double tp = v.u(0, 1), t0 = v.u(0, 0), tm = v.u(0, -1);
        double dd = (tp - t0) - (t0 - tm);
        out = SmallVec(1);
        out[0] = dd / (tau * tau) + (g_ / l_) * std::sin(0.5 * (tp + tm)) * sinc(0.5 * (tp - tm));
    }

    const ZeroCompat* zero_compat() const override { return &zc_; }

    void continuous_system(const ContinuousPoint& p, SmallVec& F) const override {
        F = SmallVec(1);
        F[0] = p.utt[0] + (g_ / l_) * std::sin(p.u[0]);
    }
    void continuous_multiplier(const ContinuousPoint& p, SmallMat& lambda) const override {
        lambda = SmallMat(1, 1);
        lambda(0, 0) = p.ut[0];
    }
    void continuous_density(const ContinuousPoint& p, SmallVec& psi) const override {
        psi = SmallVec(1);
        psi[0] = 0.5 * p.ut[0] * p.ut[0] - (g_ / l_) * std::cos(p.u[0]);
    }

    void acceleration(double, std::span<const double> u, std::span<const double>,
                      std::span<double> utt) const override {
        utt[0] = -(g_ / l_) * std::sin(u[0]);
    }

private:
    Params params_;
    double g_ = 1.0, l_ = 1.0;
    ZeroCompat zc_;
};

}  // namespace consfd::problems
