#pragma once

#include <cmath>

#include "consfd/problem.hpp"

namespace consfd::problems {

/// Inviscid Burgers equation u_t + u u_x = 0 with the family of multipliers
/// lambda = u^{p-1}, p a positive integer, conserving psi = u^p / p with flux
/// phi = u^{p+1}/(p+1). The discrete multiplier is the time-averaged power
/// sum
///   lambda^{tau,h} = (1/p) sum_{k=0}^{p-1} u_{n,j}^{p-1-k} u_{n-1,j}^{k},
/// which makes the assembled scheme telescope; p = 1 reduces exactly to the
/// classical conservative discretization (lambda == 1).
///
/// For even power sums (p = 2, 4, ...) the multiplier can vanish on
/// sign-changing states; there is no closed limit form, so those states are
/// guarded and rejected.
class Burgers final : public Problem {
public:
    explicit Burgers(Params pr) : params_(std::move(pr)) {
        double pd = params_.get_or("p", 1.0);
        p_ = static_cast<int>(pd);
        if (static_cast<double>(p_) != pd || p_ < 1)
            throw std::invalid_argument("burgers: p must be a positive integer");
        params_.set("p", static_cast<double>(p_));
    }

    std::string_view name() const override { return "burgers"; }
    int num_equations() const override { return 1; }
    int num_conservation_laws() const override { return 1; }
    int spatial_dim() const override { return 1; }
    int time_levels() const override { return 2; }
    StencilSpec stencil() const override {
        return {.time_lo = -1, .time_hi = 0, .space_lo = {-1, 0}, .space_hi = {0, 0}};
    }
    const Params& params() const override { return params_; }

    void discrete_density(const DiscreteView& v, SmallVec& out) const override {
        out = SmallVec(1);
        double u = v.u(0, 0);
        out[0] = p_ == 1 ? u : pow_int(u, p_) / static_cast<double>(p_);
    }

    void discrete_flux(const DiscreteView& v, SmallMat& out) const override {
        out = SmallMat(1, 1);
        double u = v.u(0, 0);
        out(0, 0) = p_ == 1 ? u * u / 2.0 : pow_int(u, p_ + 1) / static_cast<double>(p_ + 1);
    }

    void discrete_multiplier(const DiscreteView& v, SmallMat& lambda, SmallMat& sigma) const override {
        lambda = SmallMat(1, 1);
        lambda(0, 0) =
            p_ == 1 ? 1.0 : power_sum(v.u(0, 0), v.u(0, -1), p_) / static_cast<double>(p_);
        sigma = SmallMat(1, 0);
    }

    void continuous_system(const ContinuousPoint& p, SmallVec& F) const override {
        F = SmallVec(1);
        F[0] = p.ut[0] + p.u[0] * p.ux[0][0];
    }
    void continuous_multiplier(const ContinuousPoint& p, SmallMat& lambda) const override {
        lambda = SmallMat(1, 1);
        lambda(0, 0) = pow_int(p.u[0], p_ - 1);
    }
    void continuous_density(const ContinuousPoint& p, SmallVec& psi) const override {
        psi = SmallVec(1);
        psi[0] = pow_int(p.u[0], p_) / static_cast<double>(p_);
    }
    void continuous_flux(const ContinuousPoint& p, SmallMat& phi) const override {
        phi = SmallMat(1, 1);
        phi(0, 0) = pow_int(p.u[0], p_ + 1) / static_cast<double>(p_ + 1);
    }

private:
    Params params_;
    int p_ = 1;
};

}  // namespace consfd::problems
