#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "testutil.hpp"
#include "threewave/grid.hpp"
#include "threewave/transform.hpp"

using namespace threewave;
using twtest::rel_err;
using twtest::sample;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("quadrature: constant gives the ball volume") {
    RadialGrid g(2048, 40.0);
    Field one(g.n, 1.0);
    const double want = 4.0 / 3.0 * kPi * std::pow(g.R, 3);
    CHECK(rel_err(integrate_radial(g, one), want) < 1e-12);
}

TEST_CASE("quadrature: cubic polynomials are integrated to closed form") {
    RadialGrid g(2048, 40.0);
    // f = c0 + c1 r + c2 r^2 + c3 r^3
    const double c[4] = {0.7, -0.3, 0.11, 0.043};
    Field f = sample(g, [&](double r) { return c[0] + r * (c[1] + r * (c[2] + r * c[3])); });
    double want = 0;
    for (int k = 0; k < 4; ++k) want += 4 * kPi * c[k] * std::pow(g.R, k + 3) / (k + 3);
    CHECK(rel_err(integrate_radial(g, f), want) < 1e-12);
}

TEST_CASE("quadrature: gaussian mass") {
    RadialGrid g(2048, 40.0);
    Field f = sample(g, [](double r) { return std::exp(-r * r); });
    CHECK(rel_err(integrate_radial(g, f), std::pow(kPi, 1.5)) < 1e-8);
}

TEST_CASE("quadrature: exponential, fourth-order refinement") {
    // 4 pi int_0^R e^{-r} r^2 dr = 4 pi (2 - e^{-R}(R^2 + 2R + 2))
    const double R = 20.0;
    const double want = 4 * kPi * (2.0 - std::exp(-R) * (R * R + 2 * R + 2));
    auto err_at = [&](int n) {
        RadialGrid g(n, R);
        Field f = sample(g, [](double r) { return std::exp(-r); });
        return std::abs(integrate_radial(g, f) - want);
    };
    const double e1 = err_at(256), e2 = err_at(512);
    CHECK(e2 < e1);
    const double order = std::log2(e1 / e2);
    CHECK(order > 3.5);
    CHECK(order < 4.8);
    CHECK(err_at(2048) / want < 1e-9);
}

TEST_CASE("quadrature: caller-supplied tail correction") {
    // f = 1/(1+r^2)^2 has 4 pi int f r^2 dr = pi^2 over the whole line
    RadialGrid g(2048, 40.0);
    Field f = sample(g, [](double r) { return 1.0 / std::pow(1 + r * r, 2); });
    // int_R^inf r^2 (1+r^2)^{-2} dr = 1/R - 2/(3R^3) + ... (binomial series)
    const double R = g.R;
    double tail1d = 0;
    const double cks[6] = {1, -2, 3, -4, 5, -6};
    for (int k = 0; k < 6; ++k) tail1d += cks[k] / ((2 * k + 1) * std::pow(R, 2 * k + 1));
    const double got = integrate_radial(g, f, 4 * kPi * tail1d);
    CHECK(rel_err(got, kPi * kPi) < 1e-10);
}

TEST_CASE("derivative: r^2 is differentiated exactly, both closures") {
    RadialGrid g(1024, 20.0);
    Field f = sample(g, [](double r) { return r * r; });
    for (bool even : {false, true}) {
        Field d = radial_derivative(g, f, even);
        double worst = 0;
        for (int i = 0; i < g.n; ++i) worst = std::max(worst, std::abs(d[i] - 2 * g.r[i]));
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("derivative: constant maps to zero") {
    RadialGrid g(512, 10.0);
    Field f(g.n, 3.25);
    Field d = radial_derivative(g, f);
    CHECK(sup_abs(d) < 1e-12);
}

TEST_CASE("derivative: exponential at fourth order") {
    auto worst_at = [&](int n) {
        RadialGrid g(n, 20.0);
        Field f = sample(g, [](double r) { return std::exp(-r); });
        Field d = radial_derivative(g, f);
        double worst = 0;
        for (int i = 0; i < g.n; ++i) worst = std::max(worst, std::abs(d[i] + std::exp(-g.r[i])));
        return worst;
    };
    const double e1 = worst_at(512), e2 = worst_at(1024);
    const double order = std::log2(e1 / e2);
    CHECK(order > 3.5);
    CHECK(order < 4.6);
    CHECK(worst_at(2048) < 2e-6);
}

TEST_CASE("derivative: even closure on a regular radial profile") {
    RadialGrid g(2048, 40.0);
    Field f = sample(g, [](double r) { return std::exp(-r * r / 2); });
    Field d = radial_derivative(g, f, /*even_origin=*/true);
    double worst = 0;
    for (int i = 0; i < g.n; ++i)
        worst = std::max(worst, std::abs(d[i] + g.r[i] * std::exp(-g.r[i] * g.r[i] / 2)));
    CHECK(worst < 1e-7);
}

TEST_CASE("derivative/quadrature compatibility: integration by parts") {
    RadialGrid g(2048, 40.0);
    Field f = sample(g, [](double r) { return std::exp(-r * r / 8); });
    Field h = sample(g, [](double r) { return (1 + r * r) * std::exp(-r * r / 6); });
    Field df = radial_derivative(g, f, true), dh = radial_derivative(g, h, true);
    // 4pi int (f'h + fh') r^2 dr = -2 * 4pi int f h r dr for decaying fields
    Field lhs(g.n), rhs(g.n);
    for (int i = 0; i < g.n; ++i) {
        lhs[i] = df[i] * h[i] + f[i] * dh[i];
        rhs[i] = f[i] * h[i] / g.r[i];
    }
    const double a = integrate_radial(g, lhs), b = -2.0 * integrate_radial(g, rhs);
    CHECK(std::abs(a - b) < 1e-6 * std::max(1.0, std::abs(a)));
}

TEST_CASE("norms: gaussian closed forms") {
    RadialGrid g(2048, 40.0);
    Field f = sample(g, [](double r) { return std::exp(-r * r); });
    Norms nm = norms(g, f);
    CHECK(rel_err(nm.mass, std::pow(kPi / 2, 1.5)) < 1e-9);
    CHECK(rel_err(nm.grad_sq, 3.0 * std::pow(kPi / 2, 1.5)) < 1e-7);
    CHECK(rel_err(nm.l6, std::pow(kPi / 6, 1.5)) < 1e-9);
    CHECK(nm.sup == doctest::Approx(std::exp(-g.r[0] * g.r[0])));
    CHECK(nm.tail_frac < 1e-30);
}

TEST_CASE("interpolation: smooth profile reproduced between nodes") {
    RadialGrid g(2048, 40.0);
    Field f = sample(g, [](double r) { return std::exp(-r * r / 4) * (1 + 0.3 * r * r); });
    double worst = 0;
    for (double x : {0.001, 0.005, 0.013, 0.7, 1.37, 2.211, 5.55, 9.01}) {
        const double want = std::exp(-x * x / 4) * (1 + 0.3 * x * x);
        worst = std::max(worst, std::abs(interp_profile(g, f, x) - want));
    }
    CHECK(worst < 1e-7);
    CHECK(interp_profile(g, f, g.R + 1.0) == 0.0);
}

TEST_CASE("sine transform: mode basis maps to unit coefficients") {
    RadialGrid g(257, 13.0);
    for (int k : {1, 2, 17, 256}) {
        Field v = sample(g, [&](double r) { return std::sin(k * kPi * r / g.R); });
        Field c = sine_transform(g, v);
        double worst = 0;
        for (int j = 0; j < g.n; ++j)
            worst = std::max(worst, std::abs(c[j] - (j + 1 == k ? 1.0 : 0.0)));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("sine transform: round trip and Parseval") {
    RadialGrid g(512, 17.0);
    auto gen = twtest::rng(17);
    std::uniform_real_distribution<double> u(-1, 1);
    Field v(g.n);
    for (auto& x : v) x = u(gen);
    Field c = sine_transform(g, v);
    Field back = sine_transform_inverse(g, c);
    double worst = 0, sum_v = 0, sum_c = 0;
    for (int i = 0; i < g.n; ++i) {
        worst = std::max(worst, std::abs(back[i] - v[i]));
        sum_v += v[i] * v[i] * g.dr;
        sum_c += c[i] * c[i];
    }
    CHECK(worst < 1e-12);
    CHECK(rel_err(sum_v, 0.5 * g.R * sum_c) < 1e-12);
}

TEST_CASE("spectral Laplacian matches the closed form on a gaussian") {
    RadialGrid g(2048, 40.0);
    Field f = sample(g, [](double r) { return std::exp(-r * r); });
    Field lap = radial_laplacian(g, f);
    double worst = 0;
    for (int i = 0; i < g.n; ++i) {
        const double r = g.r[i];
        const double want = (4 * r * r - 6) * std::exp(-r * r);
        worst = std::max(worst, std::abs(lap[i] - want));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("shifted Laplacian solve inverts the operator") {
    RadialGrid g(1024, 30.0);
    Field f = sample(g, [](double r) { return r * r * std::exp(-r); });
    const double shift = 2.5;
    Field x = solve_shifted_laplacian(g, f, shift);
    Field lap = radial_laplacian(g, x);
    double worst = 0;
    for (int i = 0; i < g.n; ++i)
        worst = std::max(worst, std::abs(shift * x[i] - lap[i] - f[i]));
    CHECK(worst < 1e-9 * sup_abs(f));
}

TEST_CASE("free propagator: exact phase on a sine mode and unitarity") {
    RadialGrid g(512, 11.0);
    const int k = 5;
    const double om = std::pow(k * kPi / g.R, 2);
    CField psi(g.n);
    for (int i = 0; i < g.n; ++i)
        psi[i] = std::complex<double>(0.4, -0.2) * std::sin(k * kPi * g.r[i] / g.R) / g.r[i];
    CField want = psi;
    const double dt = 0.37;
    for (auto& z : want) z *= std::polar(1.0, -om * dt);
    free_propagate(g, psi, dt);
    double worst = 0;
    for (int i = 0; i < g.n; ++i) worst = std::max(worst, std::abs(psi[i] - want[i]));
    CHECK(worst < 1e-11);
}
