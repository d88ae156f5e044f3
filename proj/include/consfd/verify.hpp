#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <numeric>
#include <vector>

#include "consfd/report.hpp"
#include "consfd/scheme.hpp"
#include "consfd/solver.hpp"
#include "consfd/trial_field.hpp"

namespace consfd::verify {

/// 6th-order central first derivative of a callable.
inline double fd6(const std::function<double(double)>& f, double x, double dx) {
    return (-f(x - 3 * dx) + 9 * f(x - 2 * dx) - 45 * f(x - dx) + 45 * f(x + dx) -
            9 * f(x + 2 * dx) + f(x + 3 * dx)) /
           (60 * dx);
}

/// Default finite-difference step for the identity check, scaled to balance
/// 6th-order truncation against roundoff.
inline double identity_default_step() { return std::pow(machine_eps, 1.0 / 8.0); }

/// |lambda[u] . F[u] - D_t psi[u] - D_x . Phi[u]| at (t, x), with the total
/// derivatives of the continuous density/flux taken by 6th-order central
/// differences along the trial field. Zero (to truncation) for every
/// multiplier problem; a nonzero residual flags a broken (lambda, psi, Phi)
/// triple.
inline double identity_residual(const Problem& p, const TrigField& field, double t, double x0,
                                double x1, double fd_step) {
    int s = p.num_conservation_laws();
    int m = p.num_equations();
    int n = p.spatial_dim();

    ContinuousPoint pt = field.point(t, x0, x1);
    SmallVec F;
    SmallMat lambda;
    p.continuous_system(pt, F);
    p.continuous_multiplier(pt, lambda);

    double worst = 0.0;
    for (int j = 0; j < s; ++j) {
        double lamF = 0.0;
        for (int i = 0; i < m; ++i) lamF += lambda(j, i) * F[i];

        double dtpsi = fd6(
            [&](double tt) {
                SmallVec psi;
                p.continuous_density(field.point(tt, x0, x1), psi);
                return psi[j];
            },
            t, fd_step);

        double divflux = 0.0;
        for (int ax = 0; ax < n; ++ax) {
            divflux += fd6(
                [&](double xx) {
                    SmallMat phi;
                    ContinuousPoint q = ax == 0 ? field.point(t, xx, x1) : field.point(t, x0, xx);
                    p.continuous_flux(q, phi);
                    return phi(j, ax);
                },
                ax == 0 ? x0 : x1, fd_step);
        }
        worst = std::max(worst, std::abs(lamF - dtpsi - divflux));
    }
    return worst;
}

struct SlopeScan {
    std::vector<double> steps;
    std::vector<double> residuals;
    double mean_slope = 0.0;
};

/// Residual of the multiplier identity under fd-step halving; the mean
/// pairwise log2 ratio is the observed order of the derivative stencil
/// (6 for an intact problem).
inline SlopeScan identity_slope_scan(const Problem& p, const TrigField& field,
                                     std::span<const std::array<double, 3>> samples,
                                     double step0, int halvings) {
    SlopeScan scan;
    double dx = step0;
    for (int i = 0; i <= halvings; ++i, dx /= 2.0) {
        double worst = 0.0;
        for (const auto& s : samples)
            worst = std::max(worst, identity_residual(p, field, s[0], s[1], s[2], dx));
        scan.steps.push_back(dx);
        scan.residuals.push_back(worst);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < scan.residuals.size(); ++i)
        acc += std::log2(scan.residuals[i] / scan.residuals[i + 1]);
    scan.mean_slope = acc / static_cast<double>(scan.residuals.size() - 1);
    return scan;
}

/// Per-step discrete divergence identity check:
///   |(total_k - total_{k-1})/tau + flux boundary sum|
/// bounded by the solve tolerance amplified by the multiplier norm and point
/// count, plus the summation roundoff of the totals.
inline bool divergence_check(const StepRecord& row, std::size_t npoints, double residual_tol,
                             double multiplier_norm_scale, double density_scale, double tau) {
    double tol = residual_tol * static_cast<double>(npoints) * std::max(multiplier_norm_scale, 1.0) +
                 64.0 * machine_eps * static_cast<double>(npoints) * std::max(density_scale, 1.0) / tau;
    for (int j = 0; j < row.divergence_residual.size(); ++j)
        if (!(std::abs(row.divergence_residual[j]) <= tol)) return false;
    return true;
}

struct Resolution {
    double tau = 0.0;
    int extent = 0;  // points per spatial axis (PDE only)
};

/// Consistency order: evaluate max-point |F[u] - F^{tau,h}[u]| on mesh
/// samples of a smooth field and fit pairwise orders under halving. The
/// window must keep the discrete multiplier bounded away from zero.
inline ConvergenceResult consistency_order(const Problem& p, const TrigField& field,
                                           std::span<const Resolution> resolutions,
                                           double window_lo, double window_hi, int anchors = 5,
                                           double domain_length = 6.283185307179586476925287) {
    ConvergenceResult result;
    int m = p.num_equations();
    int levels = p.time_levels();
    int newest = levels == 3 ? 1 : 0;

    for (const Resolution& res : resolutions) {
        double tau = res.tau;
        SpatialGrid sg = SpatialGrid::point();
        if (p.spatial_dim() == 1)
            sg = SpatialGrid::line(res.extent, domain_length / res.extent, BoundaryMode::periodic);
        else if (p.spatial_dim() == 2)
            sg = SpatialGrid::rect(res.extent, res.extent, domain_length / res.extent,
                                   BoundaryMode::periodic, BoundaryMode::periodic);

        double worst = 0.0;
        for (int a = 0; a < anchors; ++a) {
            double ta = window_lo + (window_hi - window_lo) * (anchors == 1 ? 0.5 : a / double(anchors - 1));
            TimeGrid tg(ta - tau, tau, 2);  // anchor index 1 sits at ta
            FieldState state(m, levels, sg.npoints());
            for (int l = 0; l < levels; ++l) {
                int dt = newest - l;  // level l holds time index anchor+dt
                double tl = tg.time(1 + dt);
                for (std::size_t q = 0; q < sg.npoints(); ++q) {
                    MultiIndex J = sg.unflat(q);
                    double xx0 = sg.dim >= 1 ? sg.coord(0, J[0]) : 0.0;
                    double xx1 = sg.dim == 2 ? sg.coord(1, J[1]) : 0.0;
                    for (int c = 0; c < m; ++c) state.at(l, c, q) = field.value(c, tl, xx0, xx1);
                }
            }
            Grids grids{tg, sg};
            DiscreteView base(state, grids.space, grids.time, 1, newest);
            scheme::GuardContext guard;
            for (std::size_t q = 0; q < sg.npoints(); ++q) {
                MultiIndex J = sg.unflat(q);
                DiscreteView v = base.at(J);
                double xx0 = sg.dim >= 1 ? sg.coord(0, J[0]) : 0.0;
                double xx1 = sg.dim == 2 ? sg.coord(1, J[1]) : 0.0;
                SmallVec Fc;
                p.continuous_system(field.point(ta, xx0, xx1), Fc);
                SmallVec Fd = scheme::residual(p, v, guard, nullptr, scheme::Route::automatic);
                for (int c = 0; c < m; ++c) worst = std::max(worst, std::abs(Fc[c] - Fd[c]));
            }
        }
        result.taus.push_back(tau);
        result.hs.push_back(sg.dim > 0 ? sg.h : 0.0);
        result.errors.push_back(worst);
    }
    return result;
}

enum class ConvergenceMetric { state, density };
enum class ReferenceKind { exact, self };

struct SolutionConvergenceSpec {
    double T = 1.0;
    std::vector<Resolution> resolutions;
    ConvergenceMetric metric = ConvergenceMetric::state;
    ReferenceKind reference = ReferenceKind::exact;
    SolverConfig solver;
    /// Resamples initial data onto each sub-run's grid (required when the
    /// spatial extent varies across resolutions).
    std::function<InitialData(const Grids&)> initial_sampler;
};

/// Error at final time versus a reference (closed form, or a run at twice
/// the finest resolution) per resolution, with pairwise orders.
inline ConvergenceResult solution_convergence(const Problem& p, const InitialData& init,
                                              const SolutionConvergenceSpec& spec) {
    ConvergenceResult result;
    if (spec.reference == ReferenceKind::exact && !p.has_exact_solution())
        throw std::invalid_argument("no exact solution: self-reference mode is mandatory");

    auto make_grids = [&](const Resolution& r) {
        Grids g;
        long N = static_cast<long>(std::lround(spec.T / r.tau));
        g.time = TimeGrid(0.0, r.tau, N);
        if (p.spatial_dim() == 1)
            g.space = SpatialGrid::line(r.extent, 6.283185307179586476925287 / r.extent,
                                        BoundaryMode::periodic);
        else if (p.spatial_dim() == 2)
            g.space = SpatialGrid::rect(r.extent, r.extent, 6.283185307179586476925287 / r.extent,
                                        BoundaryMode::periodic, BoundaryMode::periodic);
        return g;
    };

    auto sample = [&](const Grids& g) {
        return spec.initial_sampler ? spec.initial_sampler(g) : init;
    };

    // Sub-runs are independent (immutable problem, private state); launch
    // them concurrently and merge in resolution order.
    std::vector<Grids> gridses;
    std::vector<std::future<IntegrationResult>> futures;
    for (const Resolution& r : spec.resolutions) {
        Grids g = make_grids(r);
        gridses.push_back(g);
        futures.push_back(std::async(std::launch::async, [&, g] { return integrate(p, g, sample(g), spec.solver); }));
    }
    std::future<IntegrationResult> ref_future;
    Grids ref_grids;
    if (spec.reference == ReferenceKind::self) {
        Resolution fine = spec.resolutions.back();
        fine.tau /= 2.0;
        fine.extent *= 2;
        ref_grids = make_grids(fine);
        ref_future = std::async(std::launch::async,
                                [&, ref_grids] { return integrate(p, ref_grids, sample(ref_grids), spec.solver); });
    }

    std::vector<IntegrationResult> runs;
    for (auto& f : futures) {
        IntegrationResult run = f.get();
        if (!run.completed) throw std::runtime_error("convergence sub-run rejected a step");
        runs.push_back(std::move(run));
    }
    IntegrationResult ref_run;
    if (spec.reference == ReferenceKind::self) {
        ref_run = ref_future.get();
        if (!ref_run.completed) throw std::runtime_error("reference run rejected a step");
    }

    for (std::size_t i = 0; i < runs.size(); ++i) {
        const IntegrationResult& run = runs[i];
        const std::vector<double>& last = run.states.back();
        double err = 0.0;
        if (spec.metric == ConvergenceMetric::density) {
            // |psi_ref(T) - psi_N| on the first density component.
            double psiN = run.report.rows.back().total_density[0];
            double ref;
            if (spec.reference == ReferenceKind::exact) {
                // Continuous density along the exact solution is constant in
                // every built-in with an exact solution; its value at t=0.
                ContinuousPoint pt;
                pt.t = 0.0;
                for (int c = 0; c < p.num_equations(); ++c) {
                    pt.u[static_cast<std::size_t>(c)] = init.u0[static_cast<std::size_t>(c)];
                    if (!init.ut0.empty())
                        pt.ut[static_cast<std::size_t>(c)] = init.ut0[static_cast<std::size_t>(c)];
                }
                SmallVec psi;
                p.continuous_density(pt, psi);
                ref = psi[0];
            } else {
                ref = ref_run.report.rows.back().total_density[0];
            }
            err = std::abs(ref - psiN);
        } else if (spec.reference == ReferenceKind::exact) {
            std::vector<double> ue(static_cast<std::size_t>(p.num_equations()));
            p.exact_solution(run.times.back(), init.u0, init.ut0, ue);
            for (int c = 0; c < p.num_equations(); ++c)
                err = std::max(err, std::abs(ue[static_cast<std::size_t>(c)] -
                                             last[static_cast<std::size_t>(c)]));
        } else {
            // Self-reference: compare on shared mesh points at final time.
            const std::vector<double>& ref = ref_run.states.back();
            std::size_t coarse_pts = gridses[i].space.npoints();
            std::size_t ratio0 = gridses[i].space.dim >= 1
                                     ? static_cast<std::size_t>(ref_grids.space.extent[0] /
                                                                gridses[i].space.extent[0])
                                     : 1;
            for (int c = 0; c < p.num_equations(); ++c) {
                for (std::size_t q = 0; q < coarse_pts; ++q) {
                    MultiIndex J = gridses[i].space.unflat(q);
                    MultiIndex Jf = {static_cast<int>(J[0] * static_cast<int>(ratio0)),
                                     static_cast<int>(J[1] * static_cast<int>(ratio0))};
                    std::size_t qf = ref_grids.space.flat(Jf);
                    double a = last[static_cast<std::size_t>(c) * coarse_pts + q];
                    double b = ref[static_cast<std::size_t>(c) * ref_grids.space.npoints() + qf];
                    err = std::max(err, std::abs(a - b));
                }
            }
        }
        result.taus.push_back(spec.resolutions[i].tau);
        result.hs.push_back(gridses[i].space.dim > 0 ? gridses[i].space.h : 0.0);
        result.errors.push_back(err);
    }
    return result;
}

}  // namespace consfd::verify
