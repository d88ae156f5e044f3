#pragma once

#include <random>
#include <vector>

#include "consfd/problem.hpp"
#include "consfd/view.hpp"

namespace consfd::testing {

/// A self-contained stencil state anchored at k=1 for driving discrete
/// operators in tests.
struct StateHolder {
    FieldState field;
    TimeGrid time{0.0, 1.0, 4};
    SpatialGrid space = SpatialGrid::point();
    int newest = 0;

    DiscreteView view(MultiIndex J = {0, 0}) const {
        return DiscreteView(field, space, time, 1, newest, J);
    }
};

/// 3-level ODE state from (u at k+1, u at k, u at k-1), m components each.
inline StateHolder ode3(double tau, std::vector<double> up, std::vector<double> u0,
                        std::vector<double> um, double t0 = 0.0) {
    StateHolder s;
    int m = static_cast<int>(up.size());
    s.field = FieldState(m, 3, 1);
    s.time = TimeGrid(t0, tau, 4);
    s.newest = 1;
    for (int c = 0; c < m; ++c) {
        s.field.at(0, c, 0) = up[static_cast<std::size_t>(c)];
        s.field.at(1, c, 0) = u0[static_cast<std::size_t>(c)];
        s.field.at(2, c, 0) = um[static_cast<std::size_t>(c)];
    }
    return s;
}

/// 2-level ODE state from (u at k, u at k-1).
inline StateHolder ode2(double tau, std::vector<double> unew, std::vector<double> uold,
                        double t0 = 0.0) {
    StateHolder s;
    int m = static_cast<int>(unew.size());
    s.field = FieldState(m, 2, 1);
    s.time = TimeGrid(t0, tau, 4);
    s.newest = 0;
    for (int c = 0; c < m; ++c) {
        s.field.at(0, c, 0) = unew[static_cast<std::size_t>(c)];
        s.field.at(1, c, 0) = uold[static_cast<std::size_t>(c)];
    }
    return s;
}

/// 2-level periodic 1-D state: unew/uold hold m*extent values, component-major.
inline StateHolder pde1(double tau, double h, int extent, int m, std::vector<double> unew,
                        std::vector<double> uold) {
    StateHolder s;
    s.field = FieldState(m, 2, static_cast<std::size_t>(extent));
    s.time = TimeGrid(0.0, tau, 4);
    s.space = SpatialGrid::line(extent, h, BoundaryMode::periodic);
    s.newest = 0;
    for (std::size_t i = 0; i < unew.size(); ++i) {
        s.field.level(0)[i] = unew[i];
        s.field.level(1)[i] = uold[i];
    }
    return s;
}

/// 2-level periodic 2-D state, component-major levels of size m*nx*ny.
inline StateHolder pde2(double tau, double h, int nx, int ny, int m, std::vector<double> unew,
                        std::vector<double> uold) {
    StateHolder s;
    s.field = FieldState(m, 2, static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    s.time = TimeGrid(0.0, tau, 4);
    s.space = SpatialGrid::rect(nx, ny, h, BoundaryMode::periodic, BoundaryMode::periodic);
    s.newest = 0;
    for (std::size_t i = 0; i < unew.size(); ++i) {
        s.field.level(0)[i] = unew[i];
        s.field.level(1)[i] = uold[i];
    }
    return s;
}

/// Random admissible stencil state for a problem (positive-quadrant offsets
/// where the problem needs them).
inline StateHolder random_state(const Problem& p, std::mt19937_64& rng, double tau = 0.05,
                                double h = 0.2, int extent = 8) {
    std::string name(p.name());
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto draw = [&](int c) {
        double base = 0.0, amp = 0.8;
        if (name == "lotka_volterra") { base = 1.6; amp = 0.5; }
        if (name == "lorenz") { base = 1.0; amp = 0.6; }
        if (name == "burgers" || name == "kdv") { base = 1.4; amp = 0.5; }
        if (name == "shallow_water" && c == 2) { base = 1.3; amp = 0.3; }
        if (name == "shallow_water" && c != 2) { base = 0.0; amp = 0.3; }
        return base + amp * unit(rng);
    };

    int m = p.num_equations();
    StateHolder s;
    if (p.spatial_dim() == 0) {
        std::vector<double> a, b, c3;
        for (int c = 0; c < m; ++c) {
            a.push_back(draw(c));
            b.push_back(draw(c));
            c3.push_back(draw(c));
        }
        return p.time_levels() == 3 ? ode3(tau, a, b, c3, 0.3) : ode2(tau, a, b, 0.3);
    }
    std::size_t npts = p.spatial_dim() == 1
                           ? static_cast<std::size_t>(extent)
                           : static_cast<std::size_t>(extent) * static_cast<std::size_t>(extent);
    std::vector<double> lnew(static_cast<std::size_t>(m) * npts), lold(lnew.size());
    for (int c = 0; c < m; ++c)
        for (std::size_t q = 0; q < npts; ++q) {
            lnew[static_cast<std::size_t>(c) * npts + q] = draw(c);
            lold[static_cast<std::size_t>(c) * npts + q] = draw(c);
        }
    return p.spatial_dim() == 1 ? pde1(tau, h, extent, m, lnew, lold)
                                : pde2(tau, h, extent, extent, m, lnew, lold);
}

}  // namespace consfd::testing
