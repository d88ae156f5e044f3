#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace consfd {

inline constexpr double machine_eps = std::numeric_limits<double>::epsilon();

/// Fixed-capacity vector for per-point quantities (components <= 3).
struct SmallVec {
    int n = 0;
    std::array<double, 3> a{};

    SmallVec() = default;
    explicit SmallVec(int size) : n(size) {}
    SmallVec(std::initializer_list<double> init) : n(static_cast<int>(init.size())) {
        int i = 0;
        for (double v : init) a[static_cast<std::size_t>(i++)] = v;
    }

    double& operator[](int i) { return a[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return a[static_cast<std::size_t>(i)]; }
    int size() const { return n; }

    double inf_norm() const {
        double m = 0.0;
        for (int i = 0; i < n; ++i) m = std::max(m, std::abs(a[static_cast<std::size_t>(i)]));
        return m;
    }
};

/// Fixed-capacity row-major matrix (up to 3x3; also used for s x n flux blocks).
struct SmallMat {
    int rows = 0, cols = 0;
    std::array<double, 9> a{};

    SmallMat() = default;
    SmallMat(int r, int c) : rows(r), cols(c) {}

    double& operator()(int r, int c) { return a[static_cast<std::size_t>(r * cols + c)]; }
    double operator()(int r, int c) const { return a[static_cast<std::size_t>(r * cols + c)]; }

    double inf_norm() const {
        double m = 0.0;
        for (int r = 0; r < rows; ++r) {
            double s = 0.0;
            for (int c = 0; c < cols; ++c) s += std::abs((*this)(r, c));
            m = std::max(m, s);
        }
        return m;
    }
};

/// Neumaier-compensated sum; keeps grid totals accurate to a few ulps.
class CompensatedSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Integer power by repeated multiplication (deterministic evaluation order).
inline double pow_int(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

/// sum_{k=0}^{q-1} a^{q-1-k} b^k, the divided-difference kernel of a^q - b^q.
inline double power_sum(double a, double b, int q) {
    double r = 0.0;
    for (int k = 0; k < q; ++k) r += pow_int(a, q - 1 - k) * pow_int(b, k);
    return r;
}

/// sin(x)/x with the removable singularity filled in.
inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    return std::sin(x) / x;
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Signals a stencil access outside a non-periodic axis range.
struct StencilRangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Signals a state outside the problem's admissible set (e.g. log of a
/// non-positive value).
struct InadmissibleStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Signals an unguarded singular discrete multiplier.
struct SingularMultiplierError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace consfd
