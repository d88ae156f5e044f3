#pragma once

#include <cmath>
#include <utility>

#include "consfd/problem.hpp"

namespace consfd::problems {

/// Interaction potential for the two-body problem. V' must be odd
/// (equivalently V even up to a constant), which is what makes the energy
/// row of the multiplier identity close exactly.
struct Potential {
    std::function<double(double)> value;
    std::function<double(double)> slope;
    /// Divided difference (V(a)-V(b))/(a-b) with the removable singularity
    /// handled; exact closed forms (quadratic: (a+b)/2) keep the discrete
    /// conservation identity tight.
    std::function<double(double, double)> divided_difference;
    bool exact_quadratic = false;

    static Potential quadratic() {
        Potential p;
        p.value = [](double z) { return 0.5 * z * z; };
        p.slope = [](double z) { return z; };
        p.divided_difference = [](double a, double b) { return 0.5 * (a + b); };
        p.exact_quadratic = true;
        return p;
    }

    static Potential generic(std::function<double(double)> V, std::function<double(double)> dV) {
        Potential p;
        p.value = std::move(V);
        p.slope = std::move(dV);
        p.divided_difference = [p_value = p.value, p_slope = p.slope](double a, double b) {
            double scale = std::max({std::abs(a), std::abs(b), 1.0});
            if (std::abs(a - b) <= 1e6 * machine_eps * scale) return p_slope(0.5 * (a + b));
            return (p_value(a) - p_value(b)) / (a - b);
        };
        return p;
    }
};

/// One-dimensional two-body system
///   x1_tt + V'(x1 - x2) = 0,   x2_tt + V'(x2 - x1) = 0,
/// conserving total momentum and energy, with multiplier rows (1, 1) and
/// (x1_t, x2_t).
class TwoBody final : public Problem {
public:
    explicit TwoBody(Params p, Potential pot = Potential::quadratic())
        : params_(std::move(p)), pot_(std::move(pot)) {}

    std::string_view name() const override { return "two_body"; }
    int num_equations() const override { return 2; }
    int num_conservation_laws() const override { return 2; }
    int spatial_dim() const override { return 0; }
    int time_levels() const override { return 3; }
    StencilSpec stencil() const override { return {.time_lo = -1, .time_hi = 1}; }
    const Params& params() const override { return params_; }

    void discrete_density(const DiscreteView& v, SmallVec& out) const override {
        double tau = v.tau();
        double d1 = (v.u(0, 1) - v.u(0, 0)) / tau;
        double d2 = (v.u(1, 1) - v.u(1, 0)) / tau;
        double wp = v.u(0, 1) - v.u(1, 1);
        double w0 = v.u(0, 0) - v.u(1, 0);
        out = SmallVec(2);
        out[0] = d1 + d2;
        out[1] = 0.5 * d1 * d1 + 0.5 * d2 * d2 + 0.5 * (pot_.value(wp) + pot_.value(w0));
    }

    void discrete_multiplier(const DiscreteView& v, SmallMat& lambda, SmallMat& sigma) const override {
        double tau2 = 2.0 * v.tau();
        lambda = SmallMat(2, 2);
        lambda(0, 0) = 1.0;
        lambda(0, 1) = 1.0;
        lambda(1, 0) = (v.u(0, 1) - v.u(0, -1)) / tau2;
        lambda(1, 1) = (v.u(1, 1) - v.u(1, -1)) / tau2;
        sigma = SmallMat(2, 0);
    }

    void density_time_derivative(const DiscreteView& v, SmallVec& out) const override {
        double tau = v.tau();
        double dd1 = (v.u(0, 1) - v.u(0, 0)) - (v.u(0, 0) - v.u(0, -1));
        double dd2 = (v.u(1, 1) - v.u(1, 0)) - (v.u(1, 0) - v.u(1, -1));
        double vel1 = (v.u(0, 1) - v.u(0, -1)) / (2.0 * tau);
        double vel2 = (v.u(1, 1) - v.u(1, -1)) / (2.0 * tau);
        double wp = v.u(0, 1) - v.u(1, 1);
        double wm = v.u(0, -1) - v.u(1, -1);
        out = SmallVec(2);
        out[0] = (dd1 + dd2) / (tau * tau);
        out[1] = vel1 * dd1 / (tau * tau) + vel2 * dd2 / (tau * tau) +
                 pot_.divided_difference(wp, wm) * (wp - wm) / (2.0 * tau);
    }

    bool has_simplified_residual() const override { return true; }
    void simplified_residual(const DiscreteView& v, SmallVec& out) const override {
        double tau = v.tau();
        double dd1 = (v.u(0, 1) - v.u(0, 0)) - (v.u(0, 0) - v.u(0, -1));
        double dd2 = (v.u(1, 1) - v.u(1, 0)) - (v.u(1, 0) - v.u(1, -1));
        double wp = v.u(0, 1) - v.u(1, 1);
        double wm = v.u(0, -1) - v.u(1, -1);
        out = SmallVec(2);
        out[0] = dd1 / (tau * tau) + pot_.divided_difference(wp, wm);
        out[1] = dd2 / (tau * tau) + pot_.divided_difference(-wp, -wm);
    }

    void continuous_system(const ContinuousPoint& p, SmallVec& F) const override {
        double w = p.u[0] - p.u[1];
        F = SmallVec(2);
        F[0] = p.utt[0] + pot_.slope(w);
        F[1] = p.utt[1] + pot_.slope(-w);
    }
    void continuous_multiplier(const ContinuousPoint& p, SmallMat& lambda) const override {
        lambda = SmallMat(2, 2);
        lambda(0, 0) = 1.0;
        lambda(0, 1) = 1.0;
        lambda(1, 0) = p.ut[0];
        lambda(1, 1) = p.ut[1];
    }
    void continuous_density(const ContinuousPoint& p, SmallVec& psi) const override {
        psi = SmallVec(2);
        psi[0] = p.ut[0] + p.ut[1];
        psi[1] = 0.5 * (p.ut[0] * p.ut[0] + p.ut[1] * p.ut[1]) + pot_.value(p.u[0] - p.u[1]);
    }

    void acceleration(double, std::span<const double> u, std::span<const double>,
                      std::span<double> utt) const override {
        double w = u[0] - u[1];
        utt[0] = -pot_.slope(w);
        utt[1] = -pot_.slope(-w);
    }

    /// Normal-mode solution for the quadratic potential: the center of mass
    /// drifts freely and the separation oscillates at sqrt(2).
    bool has_exact_solution() const override { return pot_.exact_quadratic; }
    void exact_solution(double t, std::span<const double> u0, std::span<const double> ut0,
                        std::span<double> out) const override {
        double X0 = 0.5 * (u0[0] + u0[1]);
        double Xdot = 0.5 * (ut0[0] + ut0[1]);
        double w0 = u0[0] - u0[1];
        double wdot = ut0[0] - ut0[1];
        double om = std::sqrt(2.0);
        double X = X0 + Xdot * t;
        double w = w0 * std::cos(om * t) + (wdot / om) * std::sin(om * t);
        out[0] = X + 0.5 * w;
        out[1] = X - 0.5 * w;
    }

private:
    Params params_;
    Potential pot_;
};

}  // namespace consfd::problems
