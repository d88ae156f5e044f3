#pragma once

#include <cmath>

#include "consfd/problem.hpp"

namespace consfd::problems {

/// Damped harmonic oscillator m x_tt + gamma x_t + k x = 0. The density is
/// not the mechanical energy (which dissipates) but the exponentially
/// transformed invariant
///   psi = e^{gamma t / m} ( m (x_t + gamma x / 2m)^2 + (k - gamma^2/4m) x^2 ) / 2,
/// with multiplier lambda = e^{gamma t / 2m} d/dt ( e^{gamma t / 2m} x ).
/// All discrete operators work in the transformed variable w = e^{gamma t/2m} x,
/// in which the density difference factors exactly and the assembled scheme is
/// linear in the newest level.
class DampedOscillator final : public Problem {
public:
    explicit DampedOscillator(Params p) : params_(std::move(p)) {
        mass_ = params_.get_or("m", 1.0);
        spring_ = params_.get_or("k", 5.0);
        gamma_ = params_.get_or("gamma", 0.5);
        if (!(mass_ > 0.0) || !(spring_ > 0.0) || gamma_ < 0.0)
            throw std::invalid_argument("dho: need m > 0, k > 0, gamma >= 0");
        params_.set("m", mass_);
        params_.set("k", spring_);
        params_.set("gamma", gamma_);
        c4_ = spring_ - gamma_ * gamma_ / (4.0 * mass_);
    }

    std::string_view name() const override { return "dho"; }
    int num_equations() const override { return 1; }
    int num_conservation_laws() const override { return 1; }
    int spatial_dim() const override { return 0; }
    int time_levels() const override { return 3; }
    StencilSpec stencil() const override { return {.time_lo = -1, .time_hi = 1}; }
    const Params& params() const override { return params_; }

    void discrete_density(const DiscreteView& v, SmallVec& out) const override {
        double tau = v.tau();
        double wp = w(v, 1), w0 = w(v, 0);
        double dw = (wp - w0) / tau;
        double avg = 0.5 * (wp + w0);
        out = SmallVec(1);
        out[0] = 0.5 * mass_ * dw * dw + 0.5 * c4_ * avg * avg;
    }

    void discrete_multiplier(const DiscreteView& v, SmallMat& lambda, SmallMat& sigma) const override {
        lambda = SmallMat(1, 1);
        lambda(0, 0) = env(v.t(0) / 2.0) * (w(v, 1) - w(v, -1)) / (2.0 * v.tau());
        sigma = SmallMat(1, 0);
    }

    void density_time_derivative(const DiscreteView& v, SmallVec& out) const override {
        out = SmallVec(1);
        out[0] = ((w(v, 1) - w(v, -1)) / (2.0 * v.tau())) * transformed_residual(v);
    }

    bool has_simplified_residual() const override { return true; }
    void simplified_residual(const DiscreteView& v, SmallVec& out) const override {
        out = SmallVec(1);
        out[0] = transformed_residual(v) / env(v.t(0) / 2.0);
    }

    void continuous_system(const ContinuousPoint& p, SmallVec& F) const override {
        F = SmallVec(1);
        F[0] = mass_ * p.utt[0] + gamma_ * p.ut[0] + spring_ * p.u[0];
    }
    void continuous_multiplier(const ContinuousPoint& p, SmallMat& lambda) const override {
        lambda = SmallMat(1, 1);
        lambda(0, 0) = env(p.t) * (p.ut[0] + gamma_ * p.u[0] / (2.0 * mass_));
    }
    void continuous_density(const ContinuousPoint& p, SmallVec& psi) const override {
        double q = p.ut[0] + gamma_ * p.u[0] / (2.0 * mass_);
        psi = SmallVec(1);
        psi[0] = 0.5 * env(p.t) * (mass_ * q * q + c4_ * p.u[0] * p.u[0]);
    }

    void acceleration(double, std::span<const double> u, std::span<const double> ut,
                      std::span<double> utt) const override {
        utt[0] = -(gamma_ * ut[0] + spring_ * u[0]) / mass_;
    }

    bool has_exact_solution() const override { return c4_ > 0.0; }
    void exact_solution(double t, std::span<const double> u0, std::span<const double> ut0,
                        std::span<double> out) const override {
        double om = std::sqrt(c4_ / mass_);
        double A = u0[0];
        double B = (ut0[0] + gamma_ * u0[0] / (2.0 * mass_)) / om;
        out[0] = std::exp(-gamma_ * t / (2.0 * mass_)) * (A * std::cos(om * t) + B * std::sin(om * t));
    }

    /// The continuous density is constant along exact solutions; its value
    /// from the initial data (used as the convergence reference).
    double exact_density(std::span<const double> u0, std::span<const double> ut0) const {
        double om2 = c4_ / mass_;
        double A = u0[0];
        double B = (ut0[0] + gamma_ * u0[0] / (2.0 * mass_)) / std::sqrt(om2);
        return 0.5 * mass_ * om2 * (A * A + B * B);
    }

private:
    double env(double half_t_arg) const { return std::exp(gamma_ * half_t_arg / mass_); }
    double w(const DiscreteView& v, int dt) const { return env(v.t(dt) / 2.0) * v.u(0, dt); }

    /// m (w_{n+1}-2w_n+w_{n-1})/tau^2 + (k - gamma^2/4m)(w_{n+1}+2w_n+w_{n-1})/4,
    /// the exact factor of D_t psi alongside lambda (up to the envelope).
    double transformed_residual(const DiscreteView& v) const {
        double tau = v.tau();
        double wp = w(v, 1), w0 = w(v, 0), wm = w(v, -1);
        double dd = (wp - w0) - (w0 - wm);
        return mass_ * dd / (tau * tau) + c4_ * (wp + 2.0 * w0 + wm) / 4.0;
    }

    Params params_;
    double mass_ = 1.0, spring_ = 5.0, gamma_ = 0.5;
    double c4_ = 0.0;
};

}  // namespace consfd::problems
