#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "consfd/continuous.hpp"
#include "consfd/numerics.hpp"
#include "consfd/view.hpp"

namespace consfd {

/// Named real parameters with admissible-range checking at instantiation.
class Params {
public:
    Params() = default;
    Params(std::initializer_list<std::pair<const std::string, double>> init) : values_(init) {}

    double get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw std::invalid_argument("missing parameter: " + key);
        return it->second;
    }
    double get_or(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    void set(const std::string& key, double v) { values_[key] = v; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, double>& map() const { return values_; }

private:
    std::map<std::string, double> values_;
};

/// Index offsets a problem's discrete operators may touch, relative to the
/// residual anchor (k, J).
struct StencilSpec {
    int time_lo = -1, time_hi = 0;
    std::array<int, 2> space_lo{0, 0};
    std::array<int, 2> space_hi{0, 0};
};

/// Zero-compatible evaluation data for a scalar ODE multiplier with isolated
/// zeros: the order l and the closed-form ratio of l-th partials with
/// respect to the newest unknown.
struct ZeroCompat {
    int order = 1;
    std::function<double(const DiscreteView&)> limit;
};

/// Which per-step nonlinear system the solver drives to zero.
///  - assembled: the multiplier-method residual F itself (default).
///  - conservative: the multiplier-multiplied rows D_t psi + D_x Phi - Sigma G
///    together with the G rows; same root set while Lambda-tilde is
///    invertible, with no per-point division.
enum class SolverForm { assembled, conservative };

/// A problem definition: the continuous objects (F, Lambda, psi, Phi) and
/// their discrete counterparts, with stencil and admissibility metadata.
///
/// Conventions. m equations, s conservation laws (s <= m), n spatial
/// dimensions. Discrete operators are anchored at (k, J); the density at
/// index k-1 is obtained through a time-shifted view. For rectangular
/// problems the multiplier splits into the invertible s x s block
/// `lambda` and the s x (m-s) block `sigma`, with the trailing equations
/// supplied by `discrete_g`.
class Problem {
public:
    virtual ~Problem() = default;

    virtual std::string_view name() const = 0;
    virtual int num_equations() const = 0;
    virtual int num_conservation_laws() const = 0;
    virtual int spatial_dim() const = 0;
    virtual int time_levels() const = 0;
    virtual StencilSpec stencil() const = 0;
    virtual const Params& params() const = 0;

    /// Paper-style anchor of the unknown level: +1 for 3-level stencils,
    /// 0 for 2-level ones.
    int newest_offset() const { return time_levels() == 3 ? 1 : 0; }

    // --- discrete operators -------------------------------------------------

    /// psi^{tau,h} at the view's anchor index (s components).
    virtual void discrete_density(const DiscreteView& v, SmallVec& out) const = 0;

    /// phi^{j i,tau,h} at the view's anchor point (s x n).
    virtual void discrete_flux(const DiscreteView& v, SmallMat& out) const {
        (void)v;
        out = SmallMat(num_conservation_laws(), 0);
    }

    /// Multiplier blocks at the anchor: lambda is s x s, sigma is s x (m-s).
    virtual void discrete_multiplier(const DiscreteView& v, SmallMat& lambda,
                                     SmallMat& sigma) const = 0;

    /// The trailing m-s equations of the rectangular partition.
    virtual void discrete_g(const DiscreteView& v, SmallVec& out) const {
        (void)v;
        out = SmallVec(0);
    }

    /// (psi at k - psi at k-1)/tau. Problems override this with the
    /// algebraically equal difference-first form printed alongside their
    /// scheme when that form is better behaved in floating point.
    virtual void density_time_derivative(const DiscreteView& v, SmallVec& out) const {
        SmallVec now, prev;
        discrete_density(v, now);
        discrete_density(v.time_shifted(-1), prev);
        out = SmallVec(now.size());
        double tau = v.tau();
        for (int j = 0; j < now.size(); ++j) out[j] = (now[j] - prev[j]) / tau;
    }

    /// sum_i (phi^{ji} at J - phi^{ji} at J - e_i)/h. Overridable for the
    /// same reason as density_time_derivative.
    virtual void flux_divergence(const DiscreteView& v, SmallVec& out) const {
        int s = num_conservation_laws();
        out = SmallVec(s);
        if (spatial_dim() == 0) return;
        SmallMat here, behind;
        discrete_flux(v, here);
        double h = v.h();
        for (int ax = 0; ax < spatial_dim(); ++ax) {
            discrete_flux(v.space_shifted(ax, -1), behind);
            for (int j = 0; j < s; ++j) out[j] += (here(j, ax) - behind(j, ax)) / h;
        }
    }

    /// A closed-form, singularity-free evaluation of the assembled residual
    /// (the simplified scheme printed for this problem), when one exists.
    virtual bool has_simplified_residual() const { return false; }
    virtual void simplified_residual(const DiscreteView& v, SmallVec& out) const {
        (void)v;
        (void)out;
        throw std::logic_error("no simplified residual for this problem");
    }

    virtual const ZeroCompat* zero_compat() const { return nullptr; }
    virtual SolverForm solver_form() const { return SolverForm::assembled; }

    /// Per-point admissibility of the stencil state (positivity constraints
    /// and the like). Checked by the solver before accepting iterates.
    virtual bool admissible(const DiscreteView& v) const {
        (void)v;
        return true;
    }

    // --- continuous objects -------------------------------------------------

    virtual void continuous_system(const ContinuousPoint& p, SmallVec& F) const = 0;
    /// Full s x m multiplier matrix (rows are conservation laws).
    virtual void continuous_multiplier(const ContinuousPoint& p, SmallMat& lambda) const = 0;
    virtual void continuous_density(const ContinuousPoint& p, SmallVec& psi) const = 0;
    virtual void continuous_flux(const ContinuousPoint& p, SmallMat& phi) const {
        (void)p;
        phi = SmallMat(num_conservation_laws(), 0);
    }

    // --- startup support ----------------------------------------------------

    /// u_tt from the continuous equations, for Taylor startup of 3-level
    /// schemes.
    virtual void acceleration(double t, std::span<const double> u, std::span<const double> ut,
                              std::span<double> utt) const {
        (void)t;
        (void)u;
        (void)ut;
        (void)utt;
        throw std::logic_error("acceleration not provided for this problem");
    }

    /// Closed-form solution through the initial data (u0, ut0) posed at t = 0,
    /// where available (used as a convergence reference and for exact-solution
    /// startup).
    virtual bool has_exact_solution() const { return false; }
    virtual void exact_solution(double t, std::span<const double> u0, std::span<const double> ut0,
                                std::span<double> out) const {
        (void)t;
        (void)u0;
        (void)ut0;
        (void)out;
        throw std::logic_error("no exact solution for this problem");
    }
};

using ProblemPtr = std::shared_ptr<const Problem>;

}  // namespace consfd
