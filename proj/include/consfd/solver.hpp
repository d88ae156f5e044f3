#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "consfd/grid.hpp"
#include "consfd/problem.hpp"
#include "consfd/report.hpp"
#include "consfd/scheme.hpp"

namespace consfd {

struct Grids {
    TimeGrid time;
    SpatialGrid space;
};

enum class Predictor { copy, linear_extrapolation };
enum class StartupMode { exact_solution, taylor2, given };

struct SolverConfig {
    double residual_tol = 1e-12;
    int max_iters = 50;
    double jacobian_fd_eps = 1e-7;
    Predictor predictor = Predictor::linear_extrapolation;
    StartupMode startup = StartupMode::taylor2;

    void validate() const {
        if (!(residual_tol > 0.0)) throw std::invalid_argument("solver: residual_tol must be > 0");
        if (max_iters < 1) throw std::invalid_argument("solver: max_iters must be >= 1");
        if (jacobian_fd_eps < 1e-10 || jacobian_fd_eps > 1e-4)
            throw std::invalid_argument("solver: jacobian_fd_eps must lie in [1e-10, 1e-4]");
    }
};

enum class Rejection { none, multiplier_singular, nonconvergence, inadmissible_state };

inline const char* to_string(Rejection r) {
    switch (r) {
        case Rejection::none: return "none";
        case Rejection::multiplier_singular: return "multiplier-singular";
        case Rejection::nonconvergence: return "nonconvergence";
        case Rejection::inadmissible_state: return "inadmissible-state";
    }
    return "unknown";
}

struct StepOutcome {
    bool accepted = false;
    int iterations = 0;
    double residual_norm = std::numeric_limits<double>::infinity();
    Rejection reason = Rejection::none;
    std::string detail;
};

/// Initial data: u0 over the mesh (m * npoints, component-major), plus
/// velocity data ut0 (m values) for second-order ODE startup and an optional
/// explicit first level u1 for StartupMode::given.
struct InitialData {
    std::vector<double> u0;
    std::vector<double> ut0;
    std::vector<double> u1;
};

namespace detail {

/// Evaluate the per-step nonlinear system into R (m * npoints rows,
/// component-major). For SolverForm::conservative the rows are the
/// multiplier-multiplied conservative form plus the trailing G equations,
/// which have the same roots as the assembled residual while the invertible
/// block stays regular; everything else drives the assembled residual.
inline void eval_step_system(const Problem& p, const FieldState& state, const Grids& grids,
                             long anchor, scheme::GuardContext& guard, std::vector<double>& R) {
    int m = p.num_equations();
    int s = p.num_conservation_laws();
    std::size_t npts = grids.space.npoints();
    R.resize(static_cast<std::size_t>(m) * npts);
    bool conservative = p.solver_form() == SolverForm::conservative;
    DiscreteView base(state, grids.space, grids.time, anchor, p.newest_offset());
    for (std::size_t q = 0; q < npts; ++q) {
        DiscreteView v = base.at(grids.space.unflat(q));
        if (!p.admissible(v)) throw InadmissibleStateError("solver iterate left the admissible set");
        SmallVec rows;
        if (conservative) {
            SmallVec g;
            SmallVec cons = scheme::conservative_form_residual(p, v, &g);
            rows = SmallVec(m);
            for (int j = 0; j < s; ++j) rows[j] = cons[j];
            for (int c = 0; c < m - s; ++c) rows[s + c] = g[c];
        } else {
            rows = scheme::residual(p, v, guard, nullptr, scheme::Route::automatic);
        }
        for (int c = 0; c < m; ++c) R[static_cast<std::size_t>(c) * npts + q] = rows[c];
    }
}

inline double inf_norm(const std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n = std::max(n, std::abs(x));
    return n;
}

/// Spatial color classes for simultaneous finite-difference probing of the
/// Jacobian: two unknowns share a color only if their affected residual
/// boxes (derived from the declared stencil) cannot intersect.
struct ColorPlan {
    std::array<int, 2> colors{1, 1};
    std::vector<std::vector<std::size_t>> classes;
};

inline ColorPlan make_color_plan(const Problem& p, const SpatialGrid& g) {
    ColorPlan plan;
    StencilSpec st = p.stencil();
    for (int ax = 0; ax < g.dim; ++ax) {
        int span = st.space_hi[static_cast<std::size_t>(ax)] -
                   st.space_lo[static_cast<std::size_t>(ax)] + 1;
        int e = g.extent[static_cast<std::size_t>(ax)];
        int c = std::min(span, e);
        while (c < e && e % c != 0) ++c;  // smallest divisor of extent >= span
        plan.colors[static_cast<std::size_t>(ax)] = c;
    }
    int total = plan.colors[0] * plan.colors[1];
    plan.classes.assign(static_cast<std::size_t>(total), {});
    std::size_t npts = g.npoints();
    for (std::size_t q = 0; q < npts; ++q) {
        MultiIndex J = g.unflat(q);
        int id = (J[0] % plan.colors[0]) * plan.colors[1] + (g.dim == 2 ? J[1] % plan.colors[1] : 0);
        plan.classes[static_cast<std::size_t>(id)].push_back(q);
    }
    return plan;
}

}  // namespace detail

/// Build the startup levels: level for t0 from the initial data and, for
/// 3-level stencils, the first level by second-order Taylor expansion (with
/// u_tt from the continuous equations), exact-solution sampling, or an
/// explicitly given level.
inline FieldState startup_levels(const Problem& p, const Grids& grids, const InitialData& init,
                                 const SolverConfig& cfg) {
    cfg.validate();
    int m = p.num_equations();
    std::size_t npts = grids.space.npoints();
    std::size_t lsize = static_cast<std::size_t>(m) * npts;
    if (init.u0.size() != lsize)
        throw std::invalid_argument("initial data u0 has wrong size (expected m * npoints)");

    FieldState state(m, p.time_levels(), npts);
    if (p.time_levels() == 2) {
        state.level(1) = init.u0;
        state.level(0) = init.u0;
        return state;
    }

    // 3-level stencils need a synthesized level at t1.
    std::vector<double> u1(lsize);
    switch (cfg.startup) {
        case StartupMode::given:
            if (init.u1.size() != lsize)
                throw std::invalid_argument("StartupMode::given requires a full u1 level");
            u1 = init.u1;
            break;
        case StartupMode::exact_solution: {
            if (!p.has_exact_solution())
                throw std::invalid_argument("no exact solution available for startup");
            if (init.ut0.size() != static_cast<std::size_t>(m))
                throw std::invalid_argument("startup requires velocity data ut0 (m values)");
            p.exact_solution(grids.time.tau, init.u0, init.ut0, u1);
            break;
        }
        case StartupMode::taylor2: {
            if (init.ut0.size() != static_cast<std::size_t>(m))
                throw std::invalid_argument("startup requires velocity data ut0 (m values)");
            std::vector<double> utt(static_cast<std::size_t>(m));
            p.acceleration(grids.time.t0, init.u0, init.ut0, utt);
            double tau = grids.time.tau;
            for (int c = 0; c < m; ++c)
                u1[static_cast<std::size_t>(c)] = init.u0[static_cast<std::size_t>(c)] +
                                                  tau * init.ut0[static_cast<std::size_t>(c)] +
                                                  0.5 * tau * tau * utt[static_cast<std::size_t>(c)];
            break;
        }
    }
    state.level(2) = init.u0;
    state.level(1) = u1;
    state.level(0) = u1;
    if (!state.all_finite()) throw std::invalid_argument("startup produced non-finite values");
    return state;
}

/// Conservation accounting at an accepted anchor: density totals at k and
/// k-1, boundary flux sum, divergence residual, and the multiplier
/// conditioning probes.
inline StepRecord make_step_record(const Problem& p, const FieldState& state, const Grids& grids,
                                   long anchor, int iters, double resnorm) {
    int s = p.num_conservation_laws();
    StepRecord rec;
    rec.step = anchor;
    rec.time = grids.time.time(anchor);
    rec.newton_iters = iters;
    rec.residual_norm = resnorm;
    rec.total_density = SmallVec(s);
    rec.boundary_flux_sum = SmallVec(s);
    rec.divergence_residual = SmallVec(s);

    std::array<CompensatedSum, 3> now{}, prev{};
    DiscreteView base(state, grids.space, grids.time, anchor, p.newest_offset());
    std::size_t npts = grids.space.npoints();
    for (std::size_t q = 0; q < npts; ++q) {
        DiscreteView v = base.at(grids.space.unflat(q));
        SmallVec a, b;
        p.discrete_density(v, a);
        p.discrete_density(v.time_shifted(-1), b);
        for (int j = 0; j < s; ++j) {
            now[static_cast<std::size_t>(j)].add(a[j]);
            prev[static_cast<std::size_t>(j)].add(b[j]);
        }
        scheme::ConditionProbe probe = scheme::multiplier_condition(p, v);
        rec.multiplier_inverse_norm = std::max(rec.multiplier_inverse_norm, probe.inverse_norm);
        rec.multiplier_norm = std::max(rec.multiplier_norm, probe.norm);
    }
    if (grids.space.dim > 0 && !grids.space.all_periodic()) {
        std::array<CompensatedSum, 3> fsum{};
        for (const BoundaryPoint& bp : boundary_indices(grids.space)) {
            SmallMat phi;
            p.discrete_flux(base.at(bp.index), phi);
            for (int j = 0; j < s; ++j) {
                double dot = 0.0;
                for (int ax = 0; ax < grids.space.dim; ++ax)
                    dot += phi(j, ax) * static_cast<double>(bp.normal[static_cast<std::size_t>(ax)]);
                fsum[static_cast<std::size_t>(j)].add(dot);
            }
        }
        for (int j = 0; j < s; ++j)
            rec.boundary_flux_sum[j] = fsum[static_cast<std::size_t>(j)].value() / grids.space.h;
    }
    double tau = grids.time.tau;
    for (int j = 0; j < s; ++j) {
        rec.total_density[j] = now[static_cast<std::size_t>(j)].value();
        rec.divergence_residual[j] =
            (now[static_cast<std::size_t>(j)].value() - prev[static_cast<std::size_t>(j)].value()) / tau +
            rec.boundary_flux_sum[j];
    }
    return rec;
}

/// One implicit step: predict the newest level, solve the coupled nonlinear
/// system over all mesh points by damped Newton with a finite-difference
/// Jacobian (dense for small systems, color-probed sparse for grids), and on
/// success record conservation accounting and rotate the levels.
inline StepOutcome advance_step(const Problem& p, FieldState& state, const Grids& grids, long anchor,
                                const SolverConfig& cfg, ConservationReport* report = nullptr,
                                StepRecord* record_out = nullptr) {
    cfg.validate();
    if (grids.space.dim > 0 && !grids.space.all_periodic())
        throw std::invalid_argument(
            "time integration supports periodic spatial boundaries only (non-periodic grids are "
            "for divergence accounting)");

    int m = p.num_equations();
    std::size_t npts = grids.space.npoints();
    std::size_t nunk = static_cast<std::size_t>(m) * npts;
    StepOutcome out;

    // Predictor: newest level from the two retained ones. The recycled level
    // 0 buffer still holds the value two steps back, which is exactly what
    // linear extrapolation needs for 2-level stencils.
    std::vector<double>& U = state.level(0);
    const std::vector<double>& U1 = state.level(1);
    if (cfg.predictor == Predictor::copy) {
        U = U1;
    } else {
        const std::vector<double>& U2 = state.level(p.time_levels() == 3 ? 2 : 0);
        for (std::size_t i = 0; i < nunk; ++i) U[i] = 2.0 * U1[i] - U2[i];
    }

    scheme::GuardContext guard;
    std::vector<double> R, Rtrial, Rpert;
    auto try_eval = [&](std::vector<double>& dst) -> bool {
        detail::eval_step_system(p, state, grids, anchor, guard, dst);
        return all_finite(dst);
    };

    auto classify = [&](const std::exception& e) {
        if (dynamic_cast<const SingularMultiplierError*>(&e)) return Rejection::multiplier_singular;
        if (dynamic_cast<const InadmissibleStateError*>(&e)) return Rejection::inadmissible_state;
        return Rejection::nonconvergence;
    };

    try {
        if (!try_eval(R)) throw InadmissibleStateError("non-finite residual at predictor");
    } catch (const std::exception& e) {
        // Fall back to the previous level: the predictor overshot.
        U = U1;
        try {
            if (!try_eval(R)) throw InadmissibleStateError("non-finite residual at previous level");
        } catch (const std::exception& e2) {
            out.reason = classify(e2);
            out.detail = e2.what();
            return out;
        }
        (void)e;
    }
    double rnorm = detail::inf_norm(R);

    const bool dense = nunk <= 8;
    detail::ColorPlan plan;
    if (!dense) plan = detail::make_color_plan(p, grids.space);
    StencilSpec st = p.stencil();

    Eigen::VectorXd delta(static_cast<Eigen::Index>(nunk));
    Eigen::MatrixXd Jd;
    Eigen::SparseMatrix<double> Js;
    std::vector<Eigen::Triplet<double>> trips;

    int iter = 0;
    while (rnorm > cfg.residual_tol && iter < cfg.max_iters) {
        ++iter;
        try {
            if (dense) {
                Jd.resize(static_cast<Eigen::Index>(nunk), static_cast<Eigen::Index>(nunk));
                for (std::size_t col = 0; col < nunk; ++col) {
                    double save = U[col];
                    double d = cfg.jacobian_fd_eps * (1.0 + std::abs(save));
                    U[col] = save + d;
                    detail::eval_step_system(p, state, grids, anchor, guard, Rpert);
                    U[col] = save;
                    for (std::size_t row = 0; row < nunk; ++row)
                        Jd(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
                            (Rpert[row] - R[row]) / d;
                }
                Eigen::Map<const Eigen::VectorXd> rv(R.data(), static_cast<Eigen::Index>(nunk));
                delta = Jd.partialPivLu().solve(-rv);
            } else {
                trips.clear();
                for (int c_u = 0; c_u < m; ++c_u) {
                    for (const auto& cls : plan.classes) {
                        std::vector<double> saved(cls.size());
                        std::vector<double> deltas(cls.size());
                        for (std::size_t i = 0; i < cls.size(); ++i) {
                            std::size_t col = static_cast<std::size_t>(c_u) * npts + cls[i];
                            saved[i] = U[col];
                            deltas[i] = cfg.jacobian_fd_eps * (1.0 + std::abs(saved[i]));
                            U[col] = saved[i] + deltas[i];
                        }
                        detail::eval_step_system(p, state, grids, anchor, guard, Rpert);
                        for (std::size_t i = 0; i < cls.size(); ++i)
                            U[static_cast<std::size_t>(c_u) * npts + cls[i]] = saved[i];
                        // Scatter the probed columns into their stencil boxes.
                        for (std::size_t i = 0; i < cls.size(); ++i) {
                            std::size_t col = static_cast<std::size_t>(c_u) * npts + cls[i];
                            MultiIndex Ju = grids.space.unflat(cls[i]);
                            int lo0 = -st.space_hi[0], hi0 = -st.space_lo[0];
                            int lo1 = grids.space.dim == 2 ? -st.space_hi[1] : 0;
                            int hi1 = grids.space.dim == 2 ? -st.space_lo[1] : 0;
                            for (int d0 = lo0; d0 <= hi0; ++d0) {
                                for (int d1 = lo1; d1 <= hi1; ++d1) {
                                    MultiIndex Jr = Ju;
                                    Jr[0] = grids.space.resolve(0, Ju[0], d0);
                                    if (grids.space.dim == 2) Jr[1] = grids.space.resolve(1, Ju[1], d1);
                                    std::size_t qr = grids.space.flat(Jr);
                                    for (int c_r = 0; c_r < m; ++c_r) {
                                        std::size_t row = static_cast<std::size_t>(c_r) * npts + qr;
                                        double dv = (Rpert[row] - R[row]) / deltas[i];
                                        if (dv != 0.0)
                                            trips.emplace_back(static_cast<int>(row),
                                                               static_cast<int>(col), dv);
                                    }
                                }
                            }
                        }
                    }
                }
                Js.resize(static_cast<Eigen::Index>(nunk), static_cast<Eigen::Index>(nunk));
                Js.setFromTriplets(trips.begin(), trips.end());
                Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
                lu.compute(Js);
                if (lu.info() != Eigen::Success)
                    throw SingularMultiplierError("Newton Jacobian is singular");
                Eigen::Map<const Eigen::VectorXd> rv(R.data(), static_cast<Eigen::Index>(nunk));
                delta = lu.solve(-rv);
            }

            // Damped update: halve until the residual improves.
            double alpha = 1.0;
            bool advanced = false;
            std::vector<double> Usave = U;
            for (int halvings = 0; halvings <= 12; ++halvings, alpha *= 0.5) {
                for (std::size_t i = 0; i < nunk; ++i)
                    U[i] = Usave[i] + alpha * delta(static_cast<Eigen::Index>(i));
                try {
                    if (!try_eval(Rtrial)) continue;
                } catch (const std::exception&) {
                    continue;
                }
                double rn = detail::inf_norm(Rtrial);
                if (rn < rnorm || rn <= cfg.residual_tol) {
                    R.swap(Rtrial);
                    rnorm = rn;
                    advanced = true;
                    break;
                }
            }
            if (!advanced) {
                U = Usave;
                out.iterations = iter;
                out.residual_norm = rnorm;
                out.reason = Rejection::nonconvergence;
                out.detail = "damped Newton stalled";
                return out;
            }
        } catch (const std::exception& e) {
            out.iterations = iter;
            out.residual_norm = rnorm;
            out.reason = classify(e);
            out.detail = e.what();
            return out;
        }
    }

    out.iterations = iter;
    out.residual_norm = rnorm;
    if (rnorm > cfg.residual_tol) {
        out.reason = Rejection::nonconvergence;
        out.detail = "iteration cap reached";
        return out;
    }
    if (!state.all_finite()) {
        out.reason = Rejection::inadmissible_state;
        out.detail = "non-finite accepted state";
        return out;
    }

    StepRecord rec = make_step_record(p, state, grids, anchor, iter, rnorm);
    if (report) {
        report->components = p.num_conservation_laws();
        report->rows.push_back(rec);
        report->max_multiplier_inverse_norm =
            std::max(report->max_multiplier_inverse_norm, rec.multiplier_inverse_norm);
        report->max_multiplier_norm = std::max(report->max_multiplier_norm, rec.multiplier_norm);
    }
    if (record_out) *record_out = rec;

    state.rotate();
    out.accepted = true;
    out.reason = Rejection::none;
    return out;
}

using Observer = std::function<void(long step, double time, const FieldState&, const StepRecord&)>;

struct IntegrationResult {
    std::vector<double> times;
    std::vector<std::vector<double>> states;  // newest level after each accepted step
    ConservationReport report;
    bool completed = false;
    StepOutcome last_outcome;
    long accepted_steps = 0;
};

/// Startup plus N steps with observers invoked after each accepted step;
/// aborts on first rejection with partial results flagged.
inline IntegrationResult integrate(const Problem& p, const Grids& grids, const InitialData& init,
                                   const SolverConfig& cfg,
                                   const std::vector<Observer>& observers = {}) {
    IntegrationResult result;
    FieldState state = startup_levels(p, grids, init, cfg);

    result.times.push_back(grids.time.time(0));
    result.states.push_back(p.time_levels() == 3 ? state.level(2) : state.level(1));
    if (p.time_levels() == 3) {
        result.times.push_back(grids.time.time(1));
        result.states.push_back(state.level(1));
    }

    // Baseline density row (the pre-step totals the spread is measured from).
    long first_anchor = 1;
    try {
        StepRecord row;
        row.step = 0;
        row.time = grids.time.time(0);
        row.newton_iters = 0;
        row.residual_norm = 0.0;
        int s = p.num_conservation_laws();
        row.total_density = SmallVec(s);
        row.boundary_flux_sum = SmallVec(s);
        row.divergence_residual = SmallVec(s);
        std::array<CompensatedSum, 3> tot{};
        std::size_t npts = grids.space.npoints();
        DiscreteView shifted(state, grids.space, grids.time, first_anchor, p.newest_offset());
        for (std::size_t q = 0; q < npts; ++q) {
            SmallVec psi;
            p.discrete_density(shifted.at(grids.space.unflat(q)).time_shifted(-1), psi);
            for (int j = 0; j < s; ++j) tot[static_cast<std::size_t>(j)].add(psi[j]);
        }
        for (int j = 0; j < s; ++j) row.total_density[j] = tot[static_cast<std::size_t>(j)].value();
        result.report.components = s;
        result.report.rows.push_back(row);
    } catch (const InadmissibleStateError& e) {
        result.report.components = p.num_conservation_laws();
        result.last_outcome.reason = Rejection::inadmissible_state;
        result.last_outcome.detail = e.what();
        return result;
    }

    long last_anchor = p.time_levels() == 3 ? grids.time.steps - 1 : grids.time.steps;
    for (long k = first_anchor; k <= last_anchor; ++k) {
        StepRecord rec;
        StepOutcome outc = advance_step(p, state, grids, k, cfg, &result.report, &rec);
        result.last_outcome = outc;
        if (!outc.accepted) return result;
        ++result.accepted_steps;
        for (const Observer& obs : observers) obs(k, rec.time, state, rec);
        long newest_index = p.time_levels() == 3 ? k + 1 : k;
        result.times.push_back(grids.time.time(newest_index));
        result.states.push_back(state.level(1));  // the just-accepted level after rotation
    }
    result.completed = true;
    return result;
}

}  // namespace consfd
