#pragma once

#include <set>
#include <stdexcept>
#include <tuple>

#include "consfd/grid.hpp"

namespace consfd {

/// Records which (dt, di, dj) offsets an operator touches; used by the
/// stencil dry-run check.
struct AccessRecorder {
    std::set<std::tuple<int, int, int>> touched;
    void note(int dt, int di, int dj) { touched.insert({dt, di, dj}); }
};

/// Read access to the stencil around an anchor (k, J).
///
/// Time offsets dt are relative to the anchor index k in the scheme formulas:
/// a 3-level problem may touch dt in {+1, 0, -1} (dt = +1 is the unknown
/// level), a 2-level problem dt in {0, -1} (dt = 0 is the unknown level).
/// Density evaluations at index k-1 use a time-shifted view.
class DiscreteView {
public:
    DiscreteView(const FieldState& f, const SpatialGrid& g, const TimeGrid& tg, long anchor_k,
                 int newest_offset, MultiIndex J = {0, 0})
        : f_(&f), g_(&g), tg_(&tg), anchor_(anchor_k), newest_(newest_offset), J_(J) {}

    double tau() const { return tg_->tau; }
    double h() const { return g_->h; }
    int dim() const { return g_->dim; }
    double t(int dt = 0) const { return tg_->time(anchor_ + shift_ + dt); }
    long anchor() const { return anchor_ + shift_; }
    const MultiIndex& J() const { return J_; }
    const SpatialGrid& grid() const { return *g_; }
    double x(int axis) const { return g_->coord(axis, J_[static_cast<std::size_t>(axis)]); }

    double u(int c, int dt) const { return value(c, dt, 0, 0); }
    double u(int c, int dt, int dj) const { return value(c, dt, dj, 0); }
    double u(int c, int dt, int di, int dj) const { return value(c, dt, di, dj); }

    DiscreteView time_shifted(int s) const {
        DiscreteView v = *this;
        v.shift_ += s;
        return v;
    }

    DiscreteView at(const MultiIndex& J) const {
        DiscreteView v = *this;
        v.J_ = J;
        return v;
    }

    /// Anchor moved by `offset` along `axis` (wrap / range rules apply).
    DiscreteView space_shifted(int axis, int offset) const {
        DiscreteView v = *this;
        v.J_[static_cast<std::size_t>(axis)] =
            g_->resolve(axis, J_[static_cast<std::size_t>(axis)], offset);
        return v;
    }

    void set_recorder(AccessRecorder* rec) { rec_ = rec; }

private:
    double value(int c, int dt, int d0, int d1) const {
        if (rec_) rec_->note(dt + shift_, d0, d1);
        int level = newest_ - (dt + shift_);
        if (level < 0 || level >= f_->levels())
            throw std::logic_error("DiscreteView: time offset outside retained levels");
        std::size_t p = 0;
        if (g_->dim >= 1) {
            MultiIndex Js = J_;
            Js[0] = g_->resolve(0, J_[0], d0);
            if (g_->dim == 2) Js[1] = g_->resolve(1, J_[1], d1);
            p = g_->flat(Js);
        }
        return f_->at(level, c, p);
    }

    const FieldState* f_;
    const SpatialGrid* g_;
    const TimeGrid* tg_;
    long anchor_;
    int newest_;
    MultiIndex J_{0, 0};
    int shift_ = 0;
    AccessRecorder* rec_ = nullptr;
};

}  // namespace consfd
