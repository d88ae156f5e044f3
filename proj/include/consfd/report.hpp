#pragma once

#include <cmath>
#include <vector>

#include "consfd/numerics.hpp"

namespace consfd {

/// Per-step conservation accounting row.
struct StepRecord {
    long step = 0;
    double time = 0.0;
    SmallVec total_density;        // sum over mesh points, per conservation law
    SmallVec boundary_flux_sum;    // (1/h) sum over boundary of Phi . nu
    SmallVec divergence_residual;  // (total_k - total_{k-1})/tau + flux sum
    int newton_iters = 0;
    double residual_norm = 0.0;
    double multiplier_inverse_norm = 0.0;
    double multiplier_norm = 0.0;
};

/// Run-level conservation report: per-step rows plus the gamma diagnostic
/// max ||Lambda^{-1}|| and the multiplier norm scale used by the divergence
/// tolerance.
struct ConservationReport {
    int components = 0;
    std::vector<StepRecord> rows;
    double max_multiplier_inverse_norm = 0.0;
    double max_multiplier_norm = 0.0;

    /// max_k - min_k of the density totals, per component.
    SmallVec density_spread() const {
        SmallVec spread(components);
        for (int j = 0; j < components; ++j) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (const auto& r : rows) {
                lo = std::min(lo, r.total_density[j]);
                hi = std::max(hi, r.total_density[j]);
            }
            spread[j] = rows.empty() ? 0.0 : hi - lo;
        }
        return spread;
    }

    /// max |total| per component (the scale the spread is judged against).
    SmallVec density_scale() const {
        SmallVec scale(components);
        for (int j = 0; j < components; ++j)
            for (const auto& r : rows)
                scale[j] = std::max(scale[j], std::abs(r.total_density[j]));
        return scale;
    }
};

/// Resolution ladder with errors and pairwise estimated orders under
/// halving (log2 ratios, matching how convergence tables are read).
struct ConvergenceResult {
    std::vector<double> taus;
    std::vector<double> hs;
    std::vector<double> errors;

    std::vector<double> orders() const {
        std::vector<double> out;
        for (std::size_t i = 0; i + 1 < errors.size(); ++i)
            out.push_back(std::log2(errors[i] / errors[i + 1]));
        return out;
    }
};

}  // namespace consfd
