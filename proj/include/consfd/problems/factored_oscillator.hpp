#pragma once

#include <cmath>

#include "consfd/problem.hpp"

namespace consfd::problems {

/// Harmonic oscillator m x_tt + k x = 0 with the energy density discretized
/// so that its time difference factors algebraically:
///   D_t psi = lambda^tau * G^tau,
///   G^tau   = m (x_{n+1}-2x_n+x_{n-1})/tau^2 + k (x_{n+1}+2x_n+x_{n-1})/4.
/// The assembled residual therefore equals G^tau everywhere, including the
/// zeros of lambda^tau = (x_{n+1}-x_{n-1})/(2 tau); the scheme is linear in
/// the newest level.
class FactoredOscillator final : public Problem {
public:
    explicit FactoredOscillator(Params p) : params_(std::move(p)) {
        mass_ = params_.get_or("m", 1.0);
        spring_ = params_.get_or("k", 1.0);
        if (!(mass_ > 0.0) || spring_ < 0.0)
            throw std::invalid_argument("factored_oscillator: need m > 0, k >= 0");
        params_.set("m", mass_);
        params_.set("k", spring_);
        zc_.order = 1;
        zc_.limit = [this](const DiscreteView& v) { return factored_form(v); };
    }

    std::string_view name() const override { return "factored_oscillator"; }
    int num_equations() const override { return 1; }
    int num_conservation_laws() const override { return 1; }
    int spatial_dim() const override { return 0; }
    int time_levels() const override { return 3; }
    StencilSpec stencil() const override { return {.time_lo = -1, .time_hi = 1}; }
    const Params& params() const override { return params_; }

    void discrete_density(const DiscreteView& v, SmallVec& out) const override {
        double tau = v.tau();
        double dv = (v.u(0, 1) - v.u(0, 0)) / tau;
        double avg = 0.5 * (v.u(0, 1) + v.u(0, 0));
        out = SmallVec(1);
        out[0] = 0.5 * mass_ * dv * dv + 0.5 * spring_ * avg * avg;
    }

    void discrete_multiplier(const DiscreteView& v, SmallMat& lambda, SmallMat& sigma) const override {
        lambda = SmallMat(1, 1);
        lambda(0, 0) = (v.u(0, 1) - v.u(0, -1)) / (2.0 * v.tau());
        sigma = SmallMat(1, 0);
    }

    void density_time_derivative(const DiscreteView& v, SmallVec& out) const override {
        out = SmallVec(1);
        out[0] = ((v.u(0, 1) - v.u(0, -1)) / (2.0 * v.tau())) * factored_form(v);
    }

    bool has_simplified_residual() const override { return true; }
    void simplified_residual(const DiscreteView& v, SmallVec& out) const override {
        out = SmallVec(1);
        out[0] = factored_form(v);
    }

    const ZeroCompat* zero_compat() const override { return &zc_; }

    void continuous_system(const ContinuousPoint& p, SmallVec& F) const override {
        F = SmallVec(1);
        F[0] = mass_ * p.utt[0] + spring_ * p.u[0];
    }
    void continuous_multiplier(const ContinuousPoint& p, SmallMat& lambda) const override {
        lambda = SmallMat(1, 1);
        lambda(0, 0) = p.ut[0];
    }
    void continuous_density(const ContinuousPoint& p, SmallVec& psi) const override {
        psi = SmallVec(1);
        psi[0] = 0.5 * mass_ * p.ut[0] * p.ut[0] + 0.5 * spring_ * p.u[0] * p.u[0];
    }

    void acceleration(double, std::span<const double> u, std::span<const double>,
                      std::span<double> utt) const override {
        utt[0] = -(spring_ / mass_) * u[0];
    }

    bool has_exact_solution() const override { return spring_ > 0.0; }
    void exact_solution(double t, std::span<const double> u0, std::span<const double> ut0,
                        std::span<double> out) const override {
        double om = std::sqrt(spring_ / mass_);
        out[0] = u0[0] * std::cos(om * t) + (ut0[0] / om) * std::sin(om * t);
    }

private:
    double factored_form(const DiscreteView& v) const {
        double tau = v.tau();
        double dd = (v.u(0, 1) - v.u(0, 0)) - (v.u(0, 0) - v.u(0, -1));
        return mass_ * dd / (tau * tau) +
               spring_ * (v.u(0, 1) + 2.0 * v.u(0, 0) + v.u(0, -1)) / 4.0;
    }

    Params params_;
    double mass_ = 1.0, spring_ = 1.0;
    ZeroCompat zc_;
};

}  // namespace consfd::problems
