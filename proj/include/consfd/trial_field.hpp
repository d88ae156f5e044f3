#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "consfd/continuous.hpp"
#include "consfd/problem.hpp"

namespace consfd {

/// One mode of a trigonometric trial field: amp * sin(om t + k . x + phase).
struct TrigTerm {
    double amp = 0.0;
    double om = 0.0;
    double k0 = 0.0;
    double k1 = 0.0;
    double phase = 0.0;
};

/// Smooth trial fields built from trigonometric polynomials; entire, with
/// closed-form derivatives of every order the continuous objects need.
class TrigField {
public:
    TrigField() = default;
    TrigField(int components, int dim) : m_(components), dim_(dim) {
        offsets_.assign(static_cast<std::size_t>(m_), 0.0);
        terms_.resize(static_cast<std::size_t>(m_));
    }

    int components() const { return m_; }
    int dim() const { return dim_; }

    void set_offset(int c, double v) { offsets_[static_cast<std::size_t>(c)] = v; }
    void add_term(int c, TrigTerm t) { terms_[static_cast<std::size_t>(c)].push_back(t); }

    double value(int c, double t, double x0 = 0.0, double x1 = 0.0) const {
        double s = offsets_[static_cast<std::size_t>(c)];
        for (const TrigTerm& e : terms_[static_cast<std::size_t>(c)])
            s += e.amp * std::sin(e.om * t + e.k0 * x0 + e.k1 * x1 + e.phase);
        return s;
    }

    ContinuousPoint point(double t, double x0 = 0.0, double x1 = 0.0) const {
        ContinuousPoint p;
        p.t = t;
        p.x = {x0, x1};
        for (int c = 0; c < m_; ++c) {
            std::size_t ci = static_cast<std::size_t>(c);
            p.u[ci] = offsets_[ci];
            for (const TrigTerm& e : terms_[ci]) {
                double arg = e.om * t + e.k0 * x0 + e.k1 * x1 + e.phase;
                double sn = std::sin(arg), cs = std::cos(arg);
                p.u[ci] += e.amp * sn;
                p.ut[ci] += e.amp * e.om * cs;
                p.utt[ci] -= e.amp * e.om * e.om * sn;
                const double k[2] = {e.k0, e.k1};
                for (int ax = 0; ax < dim_; ++ax) {
                    std::size_t ai = static_cast<std::size_t>(ax);
                    p.ux[ci][ai] += e.amp * k[ai] * cs;
                    p.uxx[ci][ai] -= e.amp * k[ai] * k[ai] * sn;
                    p.uxxx[ci][ai] -= e.amp * k[ai] * k[ai] * k[ai] * cs;
                }
            }
        }
        return p;
    }

    /// Random field with given per-component offsets, bounded amplitudes, and
    /// integer spatial wavenumbers (so periodic sampling on [0, 2pi)^n is
    /// exact).
    static TrigField random(int components, int dim, std::span<const double> offsets,
                            double max_amp, std::mt19937_64& rng) {
        TrigField f(components, dim);
        std::uniform_real_distribution<double> amp(0.2 * max_amp, max_amp);
        std::uniform_real_distribution<double> om(0.4, 2.2);
        std::uniform_real_distribution<double> ph(0.0, 6.28);
        std::uniform_int_distribution<int> wav(1, 2);
        for (int c = 0; c < components; ++c) {
            f.set_offset(c, offsets[static_cast<std::size_t>(c)]);
            for (int term = 0; term < 2; ++term) {
                TrigTerm t;
                t.amp = amp(rng) / 2.0;
                t.om = om(rng);
                t.k0 = dim >= 1 ? static_cast<double>(wav(rng)) : 0.0;
                t.k1 = dim == 2 ? static_cast<double>(wav(rng)) : 0.0;
                t.phase = ph(rng);
                f.add_term(c, t);
            }
        }
        return f;
    }

private:
    int m_ = 0;
    int dim_ = 0;
    std::vector<double> offsets_;
    std::vector<std::vector<TrigTerm>> terms_;
};

}  // namespace consfd
