#pragma once

#include <array>
#include <cmath>
#include <cstdlib>

#include "consfd/numerics.hpp"

namespace consfd {

/// LU factorization with partial pivoting for the per-point multiplier
/// systems (m <= 3). Explicit inversion is never formed; the inverse norm
/// diagnostic is obtained by solving against unit vectors.
class SmallLU {
public:
    bool factor(const SmallMat& m) {
        n_ = m.rows;
        for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c) lu_[idx(r, c)] = m(r, c);
        for (int i = 0; i < n_; ++i) piv_[static_cast<std::size_t>(i)] = i;
        min_pivot_ = std::numeric_limits<double>::infinity();

        for (int c = 0; c < n_; ++c) {
            int p = c;
            for (int r = c + 1; r < n_; ++r)
                if (std::abs(lu_[idx(r, c)]) > std::abs(lu_[idx(p, c)])) p = r;
            if (p != c) {
                for (int k = 0; k < n_; ++k) std::swap(lu_[idx(p, k)], lu_[idx(c, k)]);
                std::swap(piv_[static_cast<std::size_t>(p)], piv_[static_cast<std::size_t>(c)]);
            }
            double d = lu_[idx(c, c)];
            min_pivot_ = std::min(min_pivot_, std::abs(d));
            if (d == 0.0) return false;
            for (int r = c + 1; r < n_; ++r) {
                double f = lu_[idx(r, c)] / d;
                lu_[idx(r, c)] = f;
                for (int k = c + 1; k < n_; ++k) lu_[idx(r, k)] -= f * lu_[idx(c, k)];
            }
        }
        return true;
    }

    double min_pivot() const { return min_pivot_; }

    SmallVec solve(const SmallVec& b) const {
        SmallVec x(n_);
        std::array<double, 3> y{};
        for (int r = 0; r < n_; ++r) {
            double s = b[piv_[static_cast<std::size_t>(r)]];
            for (int c = 0; c < r; ++c) s -= lu_[idx(r, c)] * y[static_cast<std::size_t>(c)];
            y[static_cast<std::size_t>(r)] = s;
        }
        for (int r = n_ - 1; r >= 0; --r) {
            double s = y[static_cast<std::size_t>(r)];
            for (int c = r + 1; c < n_; ++c) s -= lu_[idx(r, c)] * x[c];
            x[r] = s / lu_[idx(r, r)];
        }
        return x;
    }

    /// Infinity norm of the inverse, via solves against unit vectors.
    double inverse_inf_norm() const {
        double m = 0.0;
        std::array<double, 3> rowsum{};
        for (int c = 0; c < n_; ++c) {
            SmallVec e(n_);
            e[c] = 1.0;
            SmallVec col = solve(e);
            for (int r = 0; r < n_; ++r) rowsum[static_cast<std::size_t>(r)] += std::abs(col[r]);
        }
        for (int r = 0; r < n_; ++r) m = std::max(m, rowsum[static_cast<std::size_t>(r)]);
        return m;
    }

private:
    static constexpr std::size_t idx(int r, int c) { return static_cast<std::size_t>(r * 3 + c); }
    int n_ = 0;
    std::array<double, 9> lu_{};
    std::array<int, 3> piv_{};
    double min_pivot_ = 0.0;
};

}  // namespace consfd
