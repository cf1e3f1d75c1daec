#include "threewave/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace threewave {

namespace {
constexpr double kFourPi = 4.0 * std::numbers::pi;
}

RadialGrid::RadialGrid(int n_, double R_) : n(n_), R(R_) {
    if (n < 8) throw Error("radial grid needs at least 8 interior nodes");
    if (R <= 0) throw Error("radial grid needs R > 0");
    dr = R / (n + 1);
    r.resize(n);
    for (int i = 0; i < n; ++i) r[i] = (i + 1) * dr;

    // Simpson coefficients on the n+2 closure points 0..n+1.
    std::vector<double> s(n + 2, 0.0);
    int m = n + 1;  // interval count
    int even_end = (m % 2 == 0) ? m : m - 3;
    for (int i = 0; i + 2 <= even_end; i += 2) {
        s[i] += 1.0 / 3.0;
        s[i + 1] += 4.0 / 3.0;
        s[i + 2] += 1.0 / 3.0;
    }
    if (even_end != m) {  // 3/8 rule on the last three intervals
        s[m - 3] += 3.0 / 8.0;
        s[m - 2] += 9.0 / 8.0;
        s[m - 1] += 9.0 / 8.0;
        s[m] += 3.0 / 8.0;
    }

    qw.assign(n, 0.0);
    for (int i = 0; i < n; ++i) qw[i] = kFourPi * dr * s[i + 1] * r[i] * r[i];
    // endpoint value f(R) from cubic extrapolation of the last four nodes
    const double cw = kFourPi * dr * s[n + 1] * R * R;
    qw[n - 1] += 4.0 * cw;
    qw[n - 2] += -6.0 * cw;
    qw[n - 3] += 4.0 * cw;
    qw[n - 4] += -1.0 * cw;
}

double integrate_radial(const RadialGrid& g, const Field& f) {
    if ((int)f.size() != g.n) throw Error("integrate_radial: size mismatch");
    double acc = 0;
    for (int i = 0; i < g.n; ++i) acc += g.qw[i] * f[i];
    return acc;
}

double integrate_radial(const RadialGrid& g, const Field& f, double tail) {
    return integrate_radial(g, f) + tail;
}

double inner(const RadialGrid& g, const Field& f, const Field& h) {
    if ((int)f.size() != g.n || (int)h.size() != g.n) throw Error("inner: size mismatch");
    double acc = 0;
    for (int i = 0; i < g.n; ++i) acc += g.qw[i] * f[i] * h[i];
    return acc;
}

namespace {

// fourth-order d/dr on the interior lattice; T is double or complex<double>
template <typename T>
std::vector<T> derivative_impl(const RadialGrid& g, const std::vector<T>& f, bool even_origin) {
    const int n = g.n;
    if ((int)f.size() != n) throw Error("radial_derivative: size mismatch");
    if (n < 6) throw Error("radial_derivative: grid too small");
    std::vector<T> d(n);
    const double h = g.dr;

    if (even_origin) {
        // ghost values f(-r) = f(r); stencil nodes avoid r = 0 itself
        d[0] = (-(11.0 / 12.0) * f[0] + (16.0 / 15.0) * f[1] - (3.0 / 20.0) * f[2]) / h;
        d[1] = (-(29.0 / 60.0) * f[0] - (1.0 / 6.0) * f[1] + (3.0 / 4.0) * f[2] -
                (1.0 / 10.0) * f[3]) / h;
    } else {
        d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
        d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
    }
    for (int i = 2; i < n - 2; ++i)
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    d[n - 2] = (-f[n - 5] + 6.0 * f[n - 4] - 18.0 * f[n - 3] + 10.0 * f[n - 2] +
                3.0 * f[n - 1]) / (12.0 * h);
    d[n - 1] = (3.0 * f[n - 5] - 16.0 * f[n - 4] + 36.0 * f[n - 3] - 48.0 * f[n - 2] +
                25.0 * f[n - 1]) / (12.0 * h);
    return d;
}

}  // namespace

Field radial_derivative(const RadialGrid& g, const Field& f, bool even_origin) {
    return derivative_impl(g, f, even_origin);
}

CField radial_derivative(const RadialGrid& g, const CField& f, bool even_origin) {
    return derivative_impl(g, f, even_origin);
}

Norms norms(const RadialGrid& g, const Field& f) {
    Norms out;
    Field df = radial_derivative(g, f, /*even_origin=*/true);
    double tail = 0;
    const double r_tail = 0.9 * g.R;
    for (int i = 0; i < g.n; ++i) {
        const double a2 = f[i] * f[i];
        out.mass += g.qw[i] * a2;
        out.grad_sq += g.qw[i] * df[i] * df[i];
        out.l6 += g.qw[i] * a2 * a2 * a2;
        out.sup = std::max(out.sup, std::abs(f[i]));
        if (g.r[i] > r_tail) tail += g.qw[i] * a2;
    }
    out.tail_frac = (out.mass > 0) ? tail / out.mass : 0.0;
    return out;
}

Norms norms(const RadialGrid& g, const CField& f) {
    Norms out;
    CField df = radial_derivative(g, f, /*even_origin=*/true);
    double tail = 0;
    const double r_tail = 0.9 * g.R;
    for (int i = 0; i < g.n; ++i) {
        const double a2 = std::norm(f[i]);
        out.mass += g.qw[i] * a2;
        out.grad_sq += g.qw[i] * std::norm(df[i]);
        const double m = std::abs(f[i]);
        out.l6 += g.qw[i] * a2 * a2 * a2;
        out.sup = std::max(out.sup, m);
        if (g.r[i] > r_tail) tail += g.qw[i] * a2;
    }
    out.tail_frac = (out.mass > 0) ? tail / out.mass : 0.0;
    return out;
}

double interp_profile(const RadialGrid& g, const Field& f, double x) {
    x = std::abs(x);
    if (x >= g.R) return 0.0;
    const double h = g.dr;
    if (x < h) {
        // even quadratic through (h, f0) and (2h, f1)
        return f[0] + (f[1] - f[0]) * (x * x - h * h) / (3.0 * h * h);
    }
    // cubic Lagrange on the four nodes around x
    int j = (int)std::floor(x / h) - 1;       // node index with r[j] <= x
    int lo = std::clamp(j - 1, 0, g.n - 4);   // window start
    const double t = (x - g.r[lo]) / h;       // in [..]
    const double c0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
    const double c1 = t * (t - 2) * (t - 3) / 2.0;
    const double c2 = -t * (t - 1) * (t - 3) / 2.0;
    const double c3 = t * (t - 1) * (t - 2) / 6.0;
    return c0 * f[lo] + c1 * f[lo + 1] + c2 * f[lo + 2] + c3 * f[lo + 3];
}

double sup_abs(const Field& f) {
    double s = 0;
    for (double v : f) s = std::max(s, std::abs(v));
    return s;
}

double sup_abs(const CField& f) {
    double s = 0;
    for (auto v : f) s = std::max(s, std::abs(v));
    return s;
}

}  // namespace threewave
