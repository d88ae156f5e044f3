#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "consfd/problems/catalog.hpp"
#include "consfd/solver.hpp"
#include "consfd/verify.hpp"
#include "consfd/version.hpp"

namespace consfd::cli {

using json = nlohmann::ordered_json;

/// Full-precision decimal formatting: 17 significant digits round-trips a
/// double exactly, so conservation-to-roundoff claims survive the CSV.
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key \"" + (path.empty() ? it.key() : path + "." + it.key()) +
                              "\" in config");
    }
}

inline double num(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError("expected a number at " + path);
    return j.get<double>();
}

inline long integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError("expected an integer at " + path);
    return j.get<long>();
}

inline std::string str(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError("expected a string at " + path);
    return j.get<std::string>();
}

}  // namespace detail

/// A fully resolved experiment: problem, grids, initial data, solver
/// settings, mode payload, and the resolved-config echo that reproduces it.
struct Experiment {
    std::string mode;
    ProblemPtr problem;
    Grids grids;
    InitialData initial;
    SolverConfig solver;
    std::string out_dir = "out";
    std::string prefix;

    // convergence payload
    std::vector<long> resolutions;
    verify::ReferenceKind reference = verify::ReferenceKind::exact;
    std::string metric = "state";
    std::optional<double> expected_order;
    double order_band = 0.3;

    // consistency payload
    int levels = 4;
    double base_tau = 0.0;
    int base_extent = 0;

    // checks
    bool check_divergence = true;
    std::optional<double> max_density_spread;

    json resolved;

    // initial-field preset payload (PDE resampling)
    std::string preset;
    double amplitude = 0.0;
};

namespace defaults {

struct ProblemRunDefaults {
    double T;
    long N;
    int extent;
    std::string preset;
    double amplitude;
    std::vector<double> u0, ut0;
};

inline ProblemRunDefaults run_defaults(const std::string& name) {
    if (name == "pendulum") return {10.0, 1000, 0, "", 0.0, {0.5}, {0.0}};
    if (name == "dho") return {10.0, 200, 0, "", 0.0, {1.0}, {0.0}};
    if (name == "two_body") return {10.0, 1000, 0, "", 0.0, {0.5, -0.5}, {0.0, 0.0}};
    if (name == "lotka_volterra") return {10.0, 10000, 0, "", 0.0, {2.0, 1.0}, {}};
    if (name == "lorenz") return {10.0, 10000, 0, "", 0.0, {1.0, 1.0, 28.0}, {}};
    if (name == "burgers") return {0.5, 200, 64, "one_plus_sine", 0.25, {}, {}};
    if (name == "kdv") return {1.0, 1000, 64, "one_plus_sine", 0.1, {}, {}};
    if (name == "shallow_water") return {1.0, 100, 32, "cos_bump", 0.01, {}, {}};
    if (name == "factored_oscillator") return {10.0, 200, 0, "", 0.0, {1.0}, {0.0}};
    if (name == "manufactured") return {1.0, 100, 0, "", 0.0, {1.0}, {}};
    throw ConfigError("unknown problem: " + name);
}

inline double declared_consistency_order(const std::string& name) {
    if (name == "pendulum" || name == "dho" || name == "two_body" || name == "factored_oscillator")
        return 2.0;
    return 1.0;
}

/// Manufactured field and sampling window for consistency checks; the window
/// keeps the discrete multiplier bounded away from zero.
struct ConsistencySetup {
    TrigField field;
    double window_lo, window_hi;
    double base_tau;
    int base_extent;
};

inline ConsistencySetup consistency_setup(const Problem& p) {
    std::string name(p.name());
    ConsistencySetup s{TrigField(p.num_equations(), p.spatial_dim()), 0.0, 1.0, 0.1, 0};
    TrigField& f = s.field;
    if (name == "pendulum") {
        f.add_term(0, {0.5, 1.0, 0, 0, 0});
        s.window_lo = 0.1;
        s.window_hi = 1.0;
    } else if (name == "dho") {
        f.add_term(0, {1.0, 1.0, 0, 0, 0});
        s.window_lo = 0.0;
        s.window_hi = 1.4;
    } else if (name == "two_body") {
        f.add_term(0, {0.4, 1.0, 0, 0, 0});
        f.add_term(1, {0.5, 1.0, 0, 0, 1.5707963267948966});
        s.window_lo = 0.2;
        s.window_hi = 1.4;
    } else if (name == "factored_oscillator") {
        f.add_term(0, {1.0, 1.0, 0, 0, 0});
        s.window_lo = 0.0;
        s.window_hi = 1.0;
    } else if (name == "lotka_volterra") {
        f.set_offset(0, 2.0);
        f.add_term(0, {0.3, 1.0, 0, 0, 0});
        f.set_offset(1, 1.5);
        f.add_term(1, {0.2, 1.3, 0, 0, 0.4});
        s.window_lo = 0.0;
        s.window_hi = 2.0;
    } else if (name == "lorenz") {
        f.set_offset(0, 1.5);
        f.add_term(0, {0.4, 1.0, 0, 0, 0});
        f.set_offset(1, 1.2);
        f.add_term(1, {0.3, 0.8, 0, 0, 1.5707963267948966});
        f.set_offset(2, 0.8);
        f.add_term(2, {0.2, 1.1, 0, 0, 0.4});
        s.window_lo = 0.0;
        s.window_hi = 2.0;
    } else if (name == "burgers") {
        f.set_offset(0, 1.5);
        f.add_term(0, {0.4, -0.7, 1, 0, 0});
        s.window_lo = 0.0;
        s.window_hi = 1.0;
        s.base_tau = 0.05;
        s.base_extent = 16;
    } else if (name == "kdv") {
        f.set_offset(0, 1.5);
        f.add_term(0, {0.4, -1.0, 1, 0, 0});
        s.window_lo = 0.0;
        s.window_hi = 1.0;
        s.base_tau = 0.05;
        s.base_extent = 16;
    } else if (name == "shallow_water") {
        f.set_offset(0, 0.0);
        f.add_term(0, {0.15, -1.0, 1, 1, 0});
        f.set_offset(1, 0.0);
        f.add_term(1, {0.1, 0.5, 1, -1, 1.5707963267948966});
        f.set_offset(2, 1.5);
        f.add_term(2, {0.1, -0.6, 1, 1, 0});
        f.add_term(2, {0.1, 0.6, 1, -1, 0});
        s.window_lo = 0.0;
        s.window_hi = 1.0;
        s.base_tau = 0.05;
        s.base_extent = 8;
    } else if (name == "manufactured") {
        f.set_offset(0, 1.0);
        f.add_term(0, {0.5, 1.3, 0, 0, 0.2});
        s.window_lo = 0.0;
        s.window_hi = 2.0;
    } else {
        throw ConfigError("no consistency setup for problem " + name);
    }
    return s;
}

/// Admissible random trial field for the continuous identity check.
inline TrigField identity_field(const Problem& p, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::string name(p.name());
    std::vector<double> offsets(static_cast<std::size_t>(p.num_equations()), 0.3);
    if (name == "lotka_volterra") offsets = {1.6, 1.4};
    if (name == "lorenz") offsets = {1.2, 1.0, 0.9};
    if (name == "burgers" || name == "kdv") offsets = {1.5};
    if (name == "shallow_water") offsets = {0.25, 0.2, 1.5};
    return TrigField::random(p.num_equations(), p.spatial_dim(), offsets, 0.4, rng);
}

}  // namespace defaults

/// Sample a named initial preset onto a grid.
inline InitialData sample_preset(const Problem& p, const Grids& grids, const std::string& preset,
                                 double amplitude) {
    std::size_t npts = grids.space.npoints();
    InitialData init;
    init.u0.assign(static_cast<std::size_t>(p.num_equations()) * npts, 0.0);
    if (preset == "one_plus_sine") {
        for (std::size_t q = 0; q < npts; ++q) {
            double x = grids.space.coord(0, grids.space.unflat(q)[0]);
            init.u0[q] = 1.0 + amplitude * std::sin(x);
        }
    } else if (preset == "cos_bump") {
        for (std::size_t q = 0; q < npts; ++q) {
            MultiIndex J = grids.space.unflat(q);
            double x = grids.space.coord(0, J[0]);
            double y = grids.space.coord(1, J[1]);
            init.u0[2 * npts + q] = 1.0 + amplitude * std::cos(x) * std::cos(y);
        }
    } else {
        throw ConfigError("unknown initial preset: " + preset);
    }
    return init;
}

/// Parse a config document (strict: unknown keys are errors, type mismatches
/// name their path) and resolve every default into the echo object.
inline Experiment parse_config(const std::string& text, const std::string& forced_mode = "") {
    json root;
    try {
        root = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return [&] {
        detail::require_keys(root, "",
                             {"problem", "params", "mode", "T", "t0", "N", "tau", "extent", "domain",
                              "boundary", "initial", "solver", "outputs", "convergence",
                              "consistency", "checks"});
        Experiment exp;
        if (!root.contains("problem")) throw ConfigError("config requires \"problem\"");
        std::string pname = detail::str(root["problem"], "problem");

        Params params;
        if (root.contains("params")) {
            if (!root["params"].is_object()) throw ConfigError("\"params\" must be an object");
            for (auto it = root["params"].begin(); it != root["params"].end(); ++it)
                params.set(it.key(), detail::num(it.value(), "params." + it.key()));
        }
        exp.problem = problems::instantiate(pname, params);

        exp.mode = forced_mode;
        if (root.contains("mode")) {
            std::string m = detail::str(root["mode"], "mode");
            if (!forced_mode.empty() && m != forced_mode)
                throw ConfigError("config mode \"" + m + "\" conflicts with subcommand \"" +
                                  forced_mode + "\"");
            exp.mode = m;
        }
        if (exp.mode.empty()) throw ConfigError("config requires \"mode\" (or use a subcommand)");
        static const std::set<std::string> modes{"run", "convergence", "consistency", "identity",
                                                 "divergence"};
        if (!modes.count(exp.mode)) throw ConfigError("unknown mode: " + exp.mode);

        auto dflt = defaults::run_defaults(pname);

        double t0 = root.contains("t0") ? detail::num(root["t0"], "t0") : 0.0;
        double T = root.contains("T") ? detail::num(root["T"], "T") : dflt.T;
        long N = dflt.N;
        if (root.contains("N") && root.contains("tau"))
            throw ConfigError("specify N or tau, not both");
        if (root.contains("N")) {
            N = detail::integer(root["N"], "N");
        } else if (root.contains("tau")) {
            double tau = detail::num(root["tau"], "tau");
            if (!(tau > 0.0)) throw ConfigError("tau must be positive");
            exp.grids.time = TimeGrid::from_step(t0, T, tau);
            N = exp.grids.time.steps;
        }
        if (!root.contains("tau")) exp.grids.time = TimeGrid::from_horizon(t0, T, N);

        // Spatial grid.
        int dim = exp.problem->spatial_dim();
        if (dim == 0) {
            exp.grids.space = SpatialGrid::point();
        } else {
            std::vector<int> extent(static_cast<std::size_t>(dim), dflt.extent);
            if (root.contains("extent")) {
                const json& ej = root["extent"];
                if (ej.is_number_integer()) {
                    extent.assign(static_cast<std::size_t>(dim),
                                  static_cast<int>(detail::integer(ej, "extent")));
                } else if (ej.is_array() && ej.size() == static_cast<std::size_t>(dim)) {
                    for (int ax = 0; ax < dim; ++ax)
                        extent[static_cast<std::size_t>(ax)] =
                            static_cast<int>(detail::integer(ej[static_cast<std::size_t>(ax)], "extent"));
                } else {
                    throw ConfigError("\"extent\" must be an integer or an array of per-axis integers");
                }
            }
            std::vector<std::array<double, 2>> domain(static_cast<std::size_t>(dim),
                                                      {0.0, 6.283185307179586476925287});
            if (root.contains("domain")) {
                const json& dj = root["domain"];
                if (!dj.is_array() || dj.size() != static_cast<std::size_t>(dim))
                    throw ConfigError("\"domain\" must list [lo, hi] per axis");
                for (int ax = 0; ax < dim; ++ax) {
                    const json& pair = dj[static_cast<std::size_t>(ax)];
                    if (!pair.is_array() || pair.size() != 2)
                        throw ConfigError("\"domain\" entries must be [lo, hi]");
                    domain[static_cast<std::size_t>(ax)] = {detail::num(pair[0], "domain"),
                                                            detail::num(pair[1], "domain")};
                }
            }
            std::vector<BoundaryMode> modes_ax(static_cast<std::size_t>(dim), BoundaryMode::periodic);
            if (root.contains("boundary")) {
                auto parse_mode = [](const std::string& s) {
                    if (s == "periodic") return BoundaryMode::periodic;
                    if (s == "boundary") return BoundaryMode::boundary;
                    throw ConfigError("boundary mode must be \"periodic\" or \"boundary\"");
                };
                const json& bj = root["boundary"];
                if (bj.is_string()) {
                    modes_ax.assign(static_cast<std::size_t>(dim), parse_mode(bj.get<std::string>()));
                } else if (bj.is_array() && bj.size() == static_cast<std::size_t>(dim)) {
                    for (int ax = 0; ax < dim; ++ax)
                        modes_ax[static_cast<std::size_t>(ax)] =
                            parse_mode(detail::str(bj[static_cast<std::size_t>(ax)], "boundary"));
                } else {
                    throw ConfigError("\"boundary\" must be a string or per-axis array");
                }
            }
            auto h_of = [&](int ax) {
                double len = domain[static_cast<std::size_t>(ax)][1] - domain[static_cast<std::size_t>(ax)][0];
                int e = extent[static_cast<std::size_t>(ax)];
                return modes_ax[static_cast<std::size_t>(ax)] == BoundaryMode::periodic
                           ? len / e
                           : len / (e - 1);
            };
            double h0 = h_of(0);
            if (dim == 2 && std::abs(h_of(1) - h0) > 1e-12 * std::abs(h0))
                throw ConfigError("mesh width must match across axes (uniform h)");
            if (dim == 1)
                exp.grids.space = SpatialGrid::line(extent[0], h0, modes_ax[0], domain[0][0]);
            else
                exp.grids.space = SpatialGrid::rect(extent[0], extent[1], h0, modes_ax[0],
                                                    modes_ax[1], domain[0][0], domain[1][0]);
        }

        // Stencil-width sanity for the spatial extents.
        StencilSpec st = exp.problem->stencil();
        for (int ax = 0; ax < dim; ++ax) {
            int width = st.space_hi[static_cast<std::size_t>(ax)] -
                        st.space_lo[static_cast<std::size_t>(ax)] + 1;
            if (exp.grids.space.extent[static_cast<std::size_t>(ax)] < width)
                throw ConfigError("grid extent smaller than the problem stencil width");
        }

        // Initial data.
        exp.preset = dflt.preset;
        exp.amplitude = dflt.amplitude;
        std::vector<double> u0 = dflt.u0, ut0 = dflt.ut0, u1;
        if (root.contains("initial")) {
            const json& ij = root["initial"];
            if (!ij.is_object()) throw ConfigError("\"initial\" must be an object");
            detail::require_keys(ij, "initial", {"preset", "amplitude", "u0", "ut0", "u1"});
            if (ij.contains("preset")) exp.preset = detail::str(ij["preset"], "initial.preset");
            if (ij.contains("amplitude"))
                exp.amplitude = detail::num(ij["amplitude"], "initial.amplitude");
            auto read_array = [&](const char* key, std::vector<double>& dst) {
                if (!ij.contains(key)) return;
                const json& a = ij[key];
                if (!a.is_array()) throw ConfigError(std::string("initial.") + key + " must be an array");
                dst.clear();
                for (const auto& x : a) dst.push_back(detail::num(x, std::string("initial.") + key));
            };
            read_array("u0", u0);
            read_array("ut0", ut0);
            read_array("u1", u1);
        }
        if (dim == 0) {
            exp.initial.u0 = u0;
            exp.initial.ut0 = ut0;
            exp.initial.u1 = u1;
        } else if (!u0.empty() && u0.size() == static_cast<std::size_t>(exp.problem->num_equations()) *
                                                   exp.grids.space.npoints()) {
            exp.initial.u0 = u0;
        } else {
            exp.initial = sample_preset(*exp.problem, exp.grids, exp.preset, exp.amplitude);
        }

        // Solver block.
        if (root.contains("solver")) {
            const json& sj = root["solver"];
            if (!sj.is_object()) throw ConfigError("\"solver\" must be an object");
            detail::require_keys(sj, "solver",
                                 {"residual_tol", "max_iters", "jacobian_fd_eps", "predictor",
                                  "startup"});
            if (sj.contains("residual_tol"))
                exp.solver.residual_tol = detail::num(sj["residual_tol"], "solver.residual_tol");
            if (sj.contains("max_iters"))
                exp.solver.max_iters = static_cast<int>(detail::integer(sj["max_iters"], "solver.max_iters"));
            if (sj.contains("jacobian_fd_eps"))
                exp.solver.jacobian_fd_eps = detail::num(sj["jacobian_fd_eps"], "solver.jacobian_fd_eps");
            if (sj.contains("predictor")) {
                std::string pmode = detail::str(sj["predictor"], "solver.predictor");
                if (pmode == "copy") exp.solver.predictor = Predictor::copy;
                else if (pmode == "linear_extrapolation") exp.solver.predictor = Predictor::linear_extrapolation;
                else throw ConfigError("solver.predictor must be copy|linear_extrapolation");
            }
            if (sj.contains("startup")) {
                std::string smode = detail::str(sj["startup"], "solver.startup");
                if (smode == "taylor2") exp.solver.startup = StartupMode::taylor2;
                else if (smode == "exact_solution") exp.solver.startup = StartupMode::exact_solution;
                else if (smode == "given") exp.solver.startup = StartupMode::given;
                else throw ConfigError("solver.startup must be taylor2|exact_solution|given");
            }
        }
        exp.solver.validate();

        if (root.contains("outputs")) {
            const json& oj = root["outputs"];
            detail::require_keys(oj, "outputs", {"dir", "prefix"});
            if (oj.contains("dir")) exp.out_dir = detail::str(oj["dir"], "outputs.dir");
            if (oj.contains("prefix")) exp.prefix = detail::str(oj["prefix"], "outputs.prefix");
        }

        if (root.contains("convergence")) {
            const json& cj = root["convergence"];
            detail::require_keys(cj, "convergence",
                                 {"resolutions", "reference", "metric", "expected_order",
                                  "order_band"});
            if (cj.contains("resolutions")) {
                for (const auto& r : cj["resolutions"])
                    exp.resolutions.push_back(detail::integer(r, "convergence.resolutions"));
            }
            if (cj.contains("reference")) {
                std::string ref = detail::str(cj["reference"], "convergence.reference");
                if (ref == "exact") exp.reference = verify::ReferenceKind::exact;
                else if (ref == "self") exp.reference = verify::ReferenceKind::self;
                else throw ConfigError("convergence.reference must be exact|self");
            }
            if (cj.contains("metric")) exp.metric = detail::str(cj["metric"], "convergence.metric");
            if (cj.contains("expected_order"))
                exp.expected_order = detail::num(cj["expected_order"], "convergence.expected_order");
            if (cj.contains("order_band"))
                exp.order_band = detail::num(cj["order_band"], "convergence.order_band");
        }
        if (exp.resolutions.empty()) exp.resolutions = {100, 200, 400, 800};

        {
            auto setup = defaults::consistency_setup(*exp.problem);
            exp.base_tau = setup.base_tau;
            exp.base_extent = setup.base_extent;
        }
        if (root.contains("consistency")) {
            const json& cj = root["consistency"];
            detail::require_keys(cj, "consistency",
                                 {"levels", "base_tau", "base_extent", "expected_order",
                                  "order_band"});
            if (cj.contains("levels"))
                exp.levels = static_cast<int>(detail::integer(cj["levels"], "consistency.levels"));
            if (cj.contains("base_tau")) exp.base_tau = detail::num(cj["base_tau"], "consistency.base_tau");
            if (cj.contains("base_extent"))
                exp.base_extent = static_cast<int>(detail::integer(cj["base_extent"], "consistency.base_extent"));
            if (cj.contains("expected_order"))
                exp.expected_order = detail::num(cj["expected_order"], "consistency.expected_order");
            if (cj.contains("order_band"))
                exp.order_band = detail::num(cj["order_band"], "consistency.order_band");
        }

        if (root.contains("checks")) {
            const json& kj = root["checks"];
            detail::require_keys(kj, "checks", {"divergence", "max_density_spread"});
            if (kj.contains("divergence")) {
                if (!kj["divergence"].is_boolean()) throw ConfigError("checks.divergence must be a boolean");
                exp.check_divergence = kj["divergence"].get<bool>();
            }
            if (kj.contains("max_density_spread"))
                exp.max_density_spread = detail::num(kj["max_density_spread"], "checks.max_density_spread");
        }

        // Resolved-config echo, defaults and all.
        json r;
        r["problem"] = pname;
        r["params"] = json::object();
        for (const auto& [k, v] : exp.problem->params().map()) r["params"][k] = v;
        r["mode"] = exp.mode;
        r["t0"] = exp.grids.time.t0;
        r["T"] = exp.grids.time.t0 + exp.grids.time.tau * static_cast<double>(exp.grids.time.steps);
        r["N"] = exp.grids.time.steps;
        r["tau"] = exp.grids.time.tau;
        if (dim > 0) {
            r["extent"] = json::array();
            r["boundary"] = json::array();
            r["domain"] = json::array();
            for (int ax = 0; ax < dim; ++ax) {
                int e = exp.grids.space.extent[static_cast<std::size_t>(ax)];
                r["extent"].push_back(e);
                bool per = exp.grids.space.periodic(ax);
                r["boundary"].push_back(per ? "periodic" : "boundary");
                double lo = exp.grids.space.origin[static_cast<std::size_t>(ax)];
                double hi = lo + exp.grids.space.h * (per ? e : e - 1);
                r["domain"].push_back(json::array({lo, hi}));
            }
            r["h"] = exp.grids.space.h;
        }
        r["initial"] = json::object();
        if (!exp.preset.empty() && dim > 0) {
            r["initial"]["preset"] = exp.preset;
            r["initial"]["amplitude"] = exp.amplitude;
        } else {
            r["initial"]["u0"] = exp.initial.u0;
            if (!exp.initial.ut0.empty()) r["initial"]["ut0"] = exp.initial.ut0;
        }
        r["solver"] = {{"residual_tol", exp.solver.residual_tol},
                       {"max_iters", exp.solver.max_iters},
                       {"jacobian_fd_eps", exp.solver.jacobian_fd_eps},
                       {"predictor", exp.solver.predictor == Predictor::copy ? "copy"
                                                                             : "linear_extrapolation"},
                       {"startup", exp.solver.startup == StartupMode::taylor2 ? "taylor2"
                                    : exp.solver.startup == StartupMode::given ? "given"
                                                                               : "exact_solution"}};
        r["outputs"] = {{"dir", exp.out_dir}, {"prefix", exp.prefix}};
        if (exp.mode == "convergence") {
            r["convergence"] = {{"resolutions", exp.resolutions},
                                {"reference", exp.reference == verify::ReferenceKind::exact ? "exact" : "self"},
                                {"metric", exp.metric},
                                {"order_band", exp.order_band}};
            if (exp.expected_order) r["convergence"]["expected_order"] = *exp.expected_order;
        }
        if (exp.mode == "consistency") {
            r["consistency"] = {{"levels", exp.levels},
                                {"base_tau", exp.base_tau},
                                {"base_extent", exp.base_extent},
                                {"order_band", exp.order_band}};
        }
        r["checks"] = {{"divergence", exp.check_divergence}};
        if (exp.max_density_spread) r["checks"]["max_density_spread"] = *exp.max_density_spread;
        exp.resolved = r;
        return exp;
    }();
}

/// Apply one dotted-path override ("solver.residual_tol=1e-13") to a raw
/// config document.
inline void apply_override(json& root, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override must look like path.key=value: " + assignment);
    std::string path = assignment.substr(0, eq);
    std::string value = assignment.substr(eq + 1);
    json* node = &root;
    std::size_t pos = 0;
    while (true) {
        auto dot = path.find('.', pos);
        std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (key.empty()) throw ConfigError("bad override path: " + path);
        if (dot == std::string::npos) {
            json parsed = json::parse(value, nullptr, false);
            (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

namespace detail {

inline std::string timestamp_utc() {
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline std::filesystem::path artifact_path(const Experiment& exp, const std::string& leaf) {
    std::filesystem::create_directories(exp.out_dir);
    return std::filesystem::path(exp.out_dir) / (exp.prefix + leaf);
}

inline void write_header(const Experiment& exp) {
    json h;
    h["version"] = consfd::version();
    h["timestamp"] = timestamp_utc();
    h["config"] = exp.resolved;
    std::ofstream out(artifact_path(exp, "header.json"));
    out << h.dump(2) << "\n";
}

inline void write_steps_csv(const Experiment& exp, const ConservationReport& report) {
    std::ofstream out(artifact_path(exp, "steps.csv"));
    out << "# consfd " << consfd::version() << "\n";
    out << "# config " << exp.resolved.dump() << "\n";
    out << "step,time,component,total_density,boundary_flux_sum,divergence_residual,newton_iters,"
           "residual_norm\n";
    for (const StepRecord& r : report.rows) {
        for (int j = 0; j < report.components; ++j) {
            out << r.step << ',' << fmt17(r.time) << ',' << j << ',' << fmt17(r.total_density[j])
                << ',' << fmt17(r.boundary_flux_sum[j]) << ',' << fmt17(r.divergence_residual[j])
                << ',' << r.newton_iters << ',' << fmt17(r.residual_norm) << "\n";
        }
    }
}

}  // namespace detail

/// mode=run: integrate, write artifacts, and gate on step acceptance plus the
/// per-step divergence identity.
inline int run_mode_run(const Experiment& exp, std::ostream& log) {
    detail::write_header(exp);
    IntegrationResult res = integrate(*exp.problem, exp.grids, exp.initial, exp.solver);
    detail::write_steps_csv(exp, res.report);

    bool divergence_ok = true;
    long failing_step = -1;
    if (exp.check_divergence) {
        for (std::size_t i = 1; i < res.report.rows.size(); ++i) {
            if (!verify::divergence_check(res.report.rows[i], exp.grids.space.npoints(),
                                          exp.solver.residual_tol, res.report.max_multiplier_norm,
                                          res.report.density_scale().inf_norm(),
                                          exp.grids.time.tau)) {
                divergence_ok = false;
                failing_step = res.report.rows[i].step;
                break;
            }
        }
    }

    SmallVec spread = res.report.density_spread();
    bool spread_ok = true;
    if (exp.max_density_spread)
        for (int j = 0; j < spread.size(); ++j)
            if (spread[j] > *exp.max_density_spread) spread_ok = false;

    json summary;
    summary["version"] = consfd::version();
    summary["config"] = exp.resolved;
    summary["completed"] = res.completed;
    summary["accepted_steps"] = res.accepted_steps;
    if (!res.completed) {
        summary["rejection"] = {{"reason", to_string(res.last_outcome.reason)},
                                {"detail", res.last_outcome.detail},
                                {"iterations", res.last_outcome.iterations},
                                {"residual_norm", res.last_outcome.residual_norm},
                                {"failing_step", res.accepted_steps + 1}};
    }
    summary["density_spread"] = json::array();
    summary["density_scale"] = json::array();
    for (int j = 0; j < spread.size(); ++j) {
        summary["density_spread"].push_back(spread[j]);
        summary["density_scale"].push_back(res.report.density_scale()[j]);
    }
    summary["max_multiplier_inverse_norm"] = res.report.max_multiplier_inverse_norm;
    summary["checks"] = {{"divergence_pass", divergence_ok}, {"spread_pass", spread_ok}};
    if (failing_step >= 0) summary["checks"]["divergence_failing_step"] = failing_step;
    std::ofstream out(detail::artifact_path(exp, "summary.json"));
    out << summary.dump(2) << "\n";

    log << "run " << exp.problem->name() << ": " << res.accepted_steps << " steps, spread=";
    for (int j = 0; j < spread.size(); ++j) log << (j ? "," : "") << fmt17(spread[j]);
    log << (res.completed && divergence_ok && spread_ok ? " [pass]" : " [FAIL]") << "\n";
    return res.completed && divergence_ok && spread_ok ? 0 : 1;
}

/// mode=convergence: error-vs-resolution table against the configured
/// reference, one block per metric.
inline int run_mode_convergence(const Experiment& exp, std::ostream& log) {
    detail::write_header(exp);
    std::vector<std::string> metrics;
    if (exp.metric == "both") {
        metrics = {"state", "density"};
    } else {
        metrics = {exp.metric};
    }

    std::ofstream out(detail::artifact_path(exp, "convergence.csv"));
    out << "# consfd " << consfd::version() << "\n";
    out << "# config " << exp.resolved.dump() << "\n";
    out << "metric,N,tau,h,error,order\n";

    bool ok = true;
    double T = exp.grids.time.t0 + exp.grids.time.tau * static_cast<double>(exp.grids.time.steps);
    for (const std::string& metric : metrics) {
        verify::SolutionConvergenceSpec spec;
        spec.T = T;
        spec.metric = metric == "density" ? verify::ConvergenceMetric::density
                                          : verify::ConvergenceMetric::state;
        spec.reference = exp.reference;
        spec.solver = exp.solver;
        int base_extent = exp.problem->spatial_dim() > 0 ? exp.grids.space.extent[0] : 0;
        long base_N = exp.resolutions.front();
        for (long N : exp.resolutions) {
            verify::Resolution r;
            r.tau = T / static_cast<double>(N);
            r.extent = exp.problem->spatial_dim() > 0
                           ? static_cast<int>(base_extent * (N / base_N))
                           : 0;
            spec.resolutions.push_back(r);
        }
        if (exp.problem->spatial_dim() > 0) {
            std::string preset = exp.preset;
            double amp = exp.amplitude;
            const Problem& prob = *exp.problem;
            spec.initial_sampler = [preset, amp, &prob](const Grids& g) {
                return sample_preset(prob, g, preset, amp);
            };
        }
        ConvergenceResult cr = verify::solution_convergence(*exp.problem, exp.initial, spec);
        std::vector<double> orders = cr.orders();
        for (std::size_t i = 0; i < cr.errors.size(); ++i) {
            out << metric << ',' << exp.resolutions[i] << ',' << fmt17(cr.taus[i]) << ','
                << fmt17(cr.hs[i]) << ',' << fmt17(cr.errors[i]) << ','
                << (i == 0 ? "" : fmt17(orders[i - 1])) << "\n";
        }
        if (exp.expected_order) {
            for (double o : orders)
                if (std::abs(o - *exp.expected_order) > exp.order_band) ok = false;
        }
        log << "convergence " << exp.problem->name() << " [" << metric << "] orders:";
        for (double o : orders) log << ' ' << fmt17(o);
        log << "\n";
    }
    return ok ? 0 : 1;
}

/// mode=consistency: |F[u] - F^{tau,h}[u]| order on the problem's
/// manufactured field, judged against the declared order of the scheme.
inline int run_mode_consistency(const Experiment& exp, std::ostream& log) {
    detail::write_header(exp);
    auto setup = defaults::consistency_setup(*exp.problem);
    double base_tau = exp.base_tau > 0 ? exp.base_tau : setup.base_tau;
    int base_extent = exp.base_extent > 0 ? exp.base_extent : setup.base_extent;

    std::vector<verify::Resolution> ladder;
    for (int r = 0; r < exp.levels; ++r)
        ladder.push_back({base_tau / std::pow(2.0, r),
                          base_extent > 0 ? base_extent * (1 << r) : 0});
    ConvergenceResult cr = verify::consistency_order(*exp.problem, setup.field, ladder,
                                                             setup.window_lo, setup.window_hi);
    double expected = exp.expected_order ? *exp.expected_order
                                         : defaults::declared_consistency_order(
                                               std::string(exp.problem->name()));

    std::ofstream out(detail::artifact_path(exp, "consistency.csv"));
    out << "# consfd " << consfd::version() << "\n";
    out << "# config " << exp.resolved.dump() << "\n";
    out << "tau,h,error,order\n";
    std::vector<double> orders = cr.orders();
    for (std::size_t i = 0; i < cr.errors.size(); ++i)
        out << fmt17(cr.taus[i]) << ',' << fmt17(cr.hs[i]) << ',' << fmt17(cr.errors[i]) << ','
            << (i == 0 ? "" : fmt17(orders[i - 1])) << "\n";

    bool ok = true;
    for (double o : orders)
        if (std::abs(o - expected) > exp.order_band) ok = false;
    log << "consistency " << exp.problem->name() << " orders:";
    for (double o : orders) log << ' ' << fmt17(o);
    log << " (expected " << expected << " +- " << exp.order_band << ") "
        << (ok ? "[pass]" : "[FAIL]") << "\n";
    return ok ? 0 : 1;
}

/// Identity suite: the continuous multiplier identity residual must vanish at
/// 6th order in the fd step for every problem checked.
inline int run_identity(const std::string& problem_filter, const std::string& out_dir,
                        std::ostream& log) {
    std::filesystem::create_directories(out_dir);
    std::ofstream out(std::filesystem::path(out_dir) / "identity.csv");
    out << "# consfd " << consfd::version() << "\n";
    out << "problem,fd_step,residual,mean_slope\n";

    bool all_ok = true;
    for (const auto& entry : problems::catalog()) {
        if (!problem_filter.empty() && entry.name != problem_filter) continue;
        ProblemPtr p = problems::instantiate(entry.name, entry.defaults);
        TrigField field = defaults::identity_field(*p, 20240801u);
        std::array<std::array<double, 3>, 3> samples{{{0.4, 0.7, 1.1}, {1.1, 2.3, 0.5}, {2.0, 4.0, 3.0}}};
        verify::SlopeScan scan = verify::identity_slope_scan(*p, field, samples, 0.2, 3);
        for (std::size_t i = 0; i < scan.steps.size(); ++i)
            out << entry.name << ',' << fmt17(scan.steps[i]) << ',' << fmt17(scan.residuals[i])
                << ',' << (i + 1 == scan.steps.size() ? fmt17(scan.mean_slope) : "") << "\n";
        bool ok = std::abs(scan.mean_slope - 6.0) <= 1.0;
        all_ok = all_ok && ok;
        log << "identity " << entry.name << ": slope " << fmt17(scan.mean_slope)
            << (ok ? " [pass]" : " [FAIL]") << "\n";
    }
    return all_ok ? 0 : 1;
}

/// mode=divergence: integrate and report the per-step discrete divergence
/// identity, one pass/fail line per step.
inline int run_mode_divergence(const Experiment& exp, std::ostream& log) {
    detail::write_header(exp);
    IntegrationResult res = integrate(*exp.problem, exp.grids, exp.initial, exp.solver);
    detail::write_steps_csv(exp, res.report);
    bool all_ok = res.completed;
    double density_scale = res.report.density_scale().inf_norm();
    for (std::size_t i = 1; i < res.report.rows.size(); ++i) {
        const StepRecord& r = res.report.rows[i];
        bool ok = verify::divergence_check(r, exp.grids.space.npoints(), exp.solver.residual_tol,
                                           res.report.max_multiplier_norm, density_scale,
                                           exp.grids.time.tau);
        all_ok = all_ok && ok;
        log << "step " << r.step << " divergence residual "
            << fmt17(r.divergence_residual.inf_norm()) << (ok ? " [pass]" : " [FAIL]") << "\n";
    }
    return all_ok ? 0 : 1;
}

inline int run_experiment(const Experiment& exp, std::ostream& log) {
    if (exp.mode == "run") return run_mode_run(exp, log);
    if (exp.mode == "convergence") return run_mode_convergence(exp, log);
    if (exp.mode == "consistency") return run_mode_consistency(exp, log);
    if (exp.mode == "divergence") return run_mode_divergence(exp, log);
    if (exp.mode == "identity")
        return run_identity(std::string(exp.problem->name()), exp.out_dir, log);
    throw ConfigError("unknown mode: " + exp.mode);
}

inline int list_problems(std::ostream& out) {
    for (const auto& e : problems::catalog()) {
        out << e.name << "  (m=" << e.m << ", s=" << e.s << ", n=" << e.n
            << ", levels=" << e.time_levels << ")\n    " << e.summary << "\n    defaults:";
        if (e.defaults.map().empty()) out << " none";
        for (const auto& [k, v] : e.defaults.map()) out << ' ' << k << '=' << fmt17(v);
        out << "\n";
    }
    return 0;
}

}  // namespace consfd::cli
