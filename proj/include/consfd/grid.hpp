#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "consfd/numerics.hpp"

namespace consfd {

/// Uniform time mesh t_k = t0 + k*tau, k = 0..steps.
struct TimeGrid {
    double t0 = 0.0;
    double tau = 1.0;
    long steps = 1;

    TimeGrid() = default;
    TimeGrid(double origin, double step, long count) : t0(origin), tau(step), steps(count) {
        if (!(tau > 0.0)) throw std::invalid_argument("TimeGrid: tau must be positive");
        if (steps < 0) throw std::invalid_argument("TimeGrid: steps must be >= 0");
    }

    static TimeGrid from_horizon(double t0, double T, long n) {
        if (n < 1) throw std::invalid_argument("TimeGrid: need at least one step");
        return TimeGrid(t0, (T - t0) / static_cast<double>(n), n);
    }

    /// floor(T/tau) steps; zero steps (T < tau) is a legal, empty run.
    static TimeGrid from_step(double t0, double T, double tau) {
        long n = static_cast<long>(std::floor((T - t0) / tau));
        return TimeGrid(t0, tau, std::max<long>(n, 0));
    }

    double time(long k) const { return t0 + static_cast<double>(k) * tau; }
};

enum class BoundaryMode { periodic, boundary };

using MultiIndex = std::array<int, 2>;

/// Uniform spatial mesh on an axis-aligned box, dim in {0, 1, 2}.
/// Non-periodic axes carry exactly the first/last index as boundary
/// (the convex single-segment case).
struct SpatialGrid {
    int dim = 0;
    double h = 1.0;
    std::array<int, 2> extent{1, 1};
    std::array<BoundaryMode, 2> mode{BoundaryMode::periodic, BoundaryMode::periodic};
    std::array<double, 2> origin{0.0, 0.0};

    static SpatialGrid point() { return SpatialGrid{}; }

    static SpatialGrid line(int npts, double mesh_width, BoundaryMode m, double x0 = 0.0) {
        SpatialGrid g;
        g.dim = 1;
        g.h = mesh_width;
        g.extent = {npts, 1};
        g.mode = {m, BoundaryMode::periodic};
        g.origin = {x0, 0.0};
        g.validate();
        return g;
    }

    static SpatialGrid rect(int nx, int ny, double mesh_width, BoundaryMode mx, BoundaryMode my,
                            double x0 = 0.0, double y0 = 0.0) {
        SpatialGrid g;
        g.dim = 2;
        g.h = mesh_width;
        g.extent = {nx, ny};
        g.mode = {mx, my};
        g.origin = {x0, y0};
        g.validate();
        return g;
    }

    void validate() const {
        if (dim < 0 || dim > 2) throw std::invalid_argument("SpatialGrid: dim must be 0, 1 or 2");
        if (dim >= 1 && !(h > 0.0)) throw std::invalid_argument("SpatialGrid: h must be positive");
        for (int ax = 0; ax < dim; ++ax)
            if (extent[static_cast<std::size_t>(ax)] < 1)
                throw std::invalid_argument("SpatialGrid: extent must be >= 1");
    }

    std::size_t npoints() const {
        std::size_t n = 1;
        for (int ax = 0; ax < dim; ++ax) n *= static_cast<std::size_t>(extent[static_cast<std::size_t>(ax)]);
        return n;
    }

    std::size_t flat(const MultiIndex& J) const {
        if (dim == 0) return 0;
        if (dim == 1) return static_cast<std::size_t>(J[0]);
        return static_cast<std::size_t>(J[0]) * static_cast<std::size_t>(extent[1]) +
               static_cast<std::size_t>(J[1]);
    }

    MultiIndex unflat(std::size_t p) const {
        if (dim == 0) return {0, 0};
        if (dim == 1) return {static_cast<int>(p), 0};
        return {static_cast<int>(p / static_cast<std::size_t>(extent[1])),
                static_cast<int>(p % static_cast<std::size_t>(extent[1]))};
    }

    double coord(int axis, int index) const {
        return origin[static_cast<std::size_t>(axis)] + h * static_cast<double>(index);
    }

    bool periodic(int axis) const { return mode[static_cast<std::size_t>(axis)] == BoundaryMode::periodic; }

    bool all_periodic() const {
        for (int ax = 0; ax < dim; ++ax)
            if (!periodic(ax)) return false;
        return true;
    }

    /// Resolve index + offset along an axis; wraps on periodic axes, throws
    /// StencilRangeError outside a non-periodic range.
    int resolve(int axis, int index, int offset) const {
        int e = extent[static_cast<std::size_t>(axis)];
        int j = index + offset;
        if (periodic(axis)) {
            j %= e;
            if (j < 0) j += e;
            return j;
        }
        if (j < 0 || j >= e)
            throw StencilRangeError("stencil access outside non-periodic axis range (axis " +
                                    std::to_string(axis) + ", index " + std::to_string(j) + ")");
        return j;
    }

    bool is_boundary(const MultiIndex& J) const {
        for (int ax = 0; ax < dim; ++ax) {
            if (periodic(ax)) continue;
            int j = J[static_cast<std::size_t>(ax)];
            if (j == 0 || j == extent[static_cast<std::size_t>(ax)] - 1) return true;
        }
        return false;
    }
};

/// A boundary mesh point with its outward normal; corner points carry one
/// +-1 slot per touched non-periodic face.
struct BoundaryPoint {
    MultiIndex index{0, 0};
    std::array<int, 2> normal{0, 0};
};

/// Enumerate the boundary index set with outward normals. Empty when every
/// axis is periodic.
inline std::vector<BoundaryPoint> boundary_indices(const SpatialGrid& g) {
    std::vector<BoundaryPoint> out;
    if (g.dim == 0 || g.all_periodic()) return out;
    std::size_t n = g.npoints();
    for (std::size_t p = 0; p < n; ++p) {
        MultiIndex J = g.unflat(p);
        BoundaryPoint bp;
        bp.index = J;
        bool on_boundary = false;
        for (int ax = 0; ax < g.dim; ++ax) {
            if (g.periodic(ax)) continue;
            int j = J[static_cast<std::size_t>(ax)];
            int e = g.extent[static_cast<std::size_t>(ax)];
            if (j == 0) {
                bp.normal[static_cast<std::size_t>(ax)] = -1;
                on_boundary = true;
            } else if (j == e - 1) {
                bp.normal[static_cast<std::size_t>(ax)] = +1;
                on_boundary = true;
            }
        }
        if (on_boundary) out.push_back(bp);
    }
    return out;
}

/// Discrete solution values over the retained time levels.
/// Level 0 is always the newest; rotation is a buffer move, never a copy of
/// values into fresh storage, so retained levels are preserved bit-exactly.
class FieldState {
public:
    FieldState() = default;
    FieldState(int components, int levels, std::size_t npoints)
        : m_(components), levels_(levels), npoints_(npoints) {
        data_.resize(static_cast<std::size_t>(levels_));
        for (auto& l : data_) l.assign(static_cast<std::size_t>(m_) * npoints_, 0.0);
    }

    int components() const { return m_; }
    int levels() const { return levels_; }
    std::size_t npoints() const { return npoints_; }
    std::size_t level_size() const { return static_cast<std::size_t>(m_) * npoints_; }

    double& at(int level, int c, std::size_t p) {
        return data_[static_cast<std::size_t>(level)][static_cast<std::size_t>(c) * npoints_ + p];
    }
    double at(int level, int c, std::size_t p) const {
        return data_[static_cast<std::size_t>(level)][static_cast<std::size_t>(c) * npoints_ + p];
    }

    std::vector<double>& level(int l) { return data_[static_cast<std::size_t>(l)]; }
    const std::vector<double>& level(int l) const { return data_[static_cast<std::size_t>(l)]; }

    /// Advance one step: the newest level becomes the current one and the
    /// stalest buffer is recycled as the new unknown slot (level 0).
    void rotate() { std::rotate(data_.begin(), data_.end() - 1, data_.end()); }

    bool all_finite() const {
        for (const auto& l : data_)
            if (!consfd::all_finite(l)) return false;
        return true;
    }

private:
    int m_ = 0;
    int levels_ = 0;
    std::size_t npoints_ = 0;
    std::vector<std::vector<double>> data_;
};

/// The m-vector at J + offset*unit(axis); periodic wrap or range error per
/// the grid's boundary mode.
inline std::vector<double> shift(const FieldState& state, const SpatialGrid& grid, int level,
                                 const MultiIndex& J, int axis, int offset) {
    MultiIndex Js = J;
    if (grid.dim > 0)
        Js[static_cast<std::size_t>(axis)] =
            grid.resolve(axis, J[static_cast<std::size_t>(axis)], offset);
    std::size_t p = grid.flat(Js);
    std::vector<double> out(static_cast<std::size_t>(state.components()));
    for (int c = 0; c < state.components(); ++c) out[static_cast<std::size_t>(c)] = state.at(level, c, p);
    return out;
}

}  // namespace consfd
