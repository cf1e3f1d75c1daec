#pragma once
// shared helpers for the test binaries

#include <cmath>
#include <functional>
#include <random>

#include "threewave/grid.hpp"

namespace twtest {

using threewave::Field;
using threewave::RadialGrid;

inline Field sample(const RadialGrid& g, const std::function<double(double)>& f) {
    Field v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = f(g.r[i]);
    return v;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

// adaptive Simpson on [a,b]; independent oracle for 1D integrals
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 0) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double left = (m - a) / 6.0 * (fa + 4 * f(lm) + fm);
    const double right = (b - m) / 6.0 * (fm + 4 * f(rm) + fb);
    if (depth > 40) return left + right;
    if (std::abs(left + right - whole) < 15.0 * tol) return left + right + (left + right - whole) / 15.0;
    std::function<double(double)> ff = f;
    return adaptive_simpson(ff, a, m, tol / 2, depth + 1) +
           adaptive_simpson(ff, m, b, tol / 2, depth + 1);
}

inline std::mt19937_64 rng(unsigned long long seed = 0x5eedULL) {
    return std::mt19937_64(seed);
}

}  // namespace twtest
