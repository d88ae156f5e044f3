#pragma once

#include <array>

namespace consfd {

/// Point data of a smooth field: values and the partial derivatives the
/// built-in continuous objects consume (up to u_tt in time and u_xxx in
/// space; no problem needs mixed partials).
struct ContinuousPoint {
    double t = 0.0;
    std::array<double, 2> x{0.0, 0.0};

    std::array<double, 3> u{};
    std::array<double, 3> ut{};
    std::array<double, 3> utt{};
    std::array<std::array<double, 2>, 3> ux{};
    std::array<std::array<double, 2>, 3> uxx{};
    std::array<std::array<double, 2>, 3> uxxx{};
};

}  // namespace consfd
