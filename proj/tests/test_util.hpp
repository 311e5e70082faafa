#pragma once

#include "doctest.h"
#include "vavam/common.hpp"

#include <cmath>

namespace test_util {

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

// Central finite difference of a scalar function of one parameter entry.
template <class F>
double central_diff(double* slot, double h, F eval) {
    const double orig = *slot;
    *slot = orig + h;
    const double fp = eval();
    *slot = orig - h;
    const double fm = eval();
    *slot = orig;
    return (fp - fm) / (2.0 * h);
}

}  // namespace test_util
