#pragma once

#include <cmath>

#include "consfd/problem.hpp"

namespace consfd::problems {

/// Trivial quadrature problem u_t - f(t) = 0 with multiplier 1 and density
/// psi = u - If(t), If' = f. Exists for harness self-tests: the scheme is
/// linear, the exact solution is u0 + If(t) - If(0), and every check has a
/// closed answer. Default f = cos, If = sin.
class ManufacturedScalar final : public Problem {
public:
    explicit ManufacturedScalar(Params p)
        : params_(std::move(p)),
          f_([](double t) { return std::cos(t); }),
          If_([](double t) { return std::sin(t); }) {}

    ManufacturedScalar(Params p, std::function<double(double)> f, std::function<double(double)> If)
        : params_(std::move(p)), f_(std::move(f)), If_(std::move(If)) {}

    std::string_view name() const override { return "manufactured"; }
    int num_equations() const override { return 1; }
    int num_conservation_laws() const override { return 1; }
    int spatial_dim() const override { return 0; }
    int time_levels() const override { return 2; }
    StencilSpec stencil() const override { return {.time_lo = -1, .time_hi = 0}; }
    const Params& params() const override { return params_; }

    void discrete_density(const DiscreteView& v, SmallVec& out) const override {
        out = SmallVec(1);
        out[0] = v.u(0, 0) - If_(v.t(0));
    }

    void discrete_multiplier(const DiscreteView&, SmallMat& lambda, SmallMat& sigma) const override {
        lambda = SmallMat(1, 1);
        lambda(0, 0) = 1.0;
        sigma = SmallMat(1, 0);
    }

    void continuous_system(const ContinuousPoint& p, SmallVec& F) const override {
        F = SmallVec(1);
        F[0] = p.ut[0] - f_(p.t);
    }
    void continuous_multiplier(const ContinuousPoint&, SmallMat& lambda) const override {
        lambda = SmallMat(1, 1);
        lambda(0, 0) = 1.0;
    }
    void continuous_density(const ContinuousPoint& p, SmallVec& psi) const override {
        psi = SmallVec(1);
        psi[0] = p.u[0] - If_(p.t);
    }

    bool has_exact_solution() const override { return true; }
    void exact_solution(double t, std::span<const double> u0, std::span<const double>,
                        std::span<double> out) const override {
        out[0] = u0[0] + If_(t) - If_(0.0);
    }

private:
    Params params_;
    std::function<double(double)> f_;
    std::function<double(double)> If_;
};

}  // namespace consfd::problems
