#include "threewave/functionals.hpp"

#include <algorithm>
#include <cmath>

namespace threewave {

Masses masses(const RadialGrid& g, const FieldTriple& u) {
    double m1 = 0, m2 = 0, m3 = 0;
    for (int i = 0; i < g.n; ++i) {
        m1 += g.qw[i] * u.u1[i] * u.u1[i];
        m2 += g.qw[i] * u.u2[i] * u.u2[i];
        m3 += g.qw[i] * u.u3[i] * u.u3[i];
    }
    return {m1 + m3, m2 + m3};
}

Masses masses(const RadialGrid& g, const CFieldTriple& psi) {
    double m1 = 0, m2 = 0, m3 = 0;
    for (int i = 0; i < g.n; ++i) {
        m1 += g.qw[i] * std::norm(psi.psi1[i]);
        m2 += g.qw[i] * std::norm(psi.psi2[i]);
        m3 += g.qw[i] * std::norm(psi.psi3[i]);
    }
    return {m1 + m3, m2 + m3};
}

double coupling(const RadialGrid& g, const FieldTriple& u) {
    double c = 0;
    for (int i = 0; i < g.n; ++i) c += g.qw[i] * u.u1[i] * u.u2[i] * u.u3[i];
    return c;
}

double coupling(const RadialGrid& g, const CFieldTriple& psi) {
    double c = 0;
    for (int i = 0; i < g.n; ++i)
        c += g.qw[i] * (psi.psi1[i] * psi.psi2[i] * std::conj(psi.psi3[i])).real();
    return c;
}

bool in_M(const RadialGrid& g, const FieldTriple& u) { return coupling(g, u) > 0; }
bool in_M(const RadialGrid& g, const CFieldTriple& psi) { return coupling(g, psi) > 0; }

namespace {

struct Sums {
    double grad = 0, l6 = 0;
};

Sums grad_and_l6(const RadialGrid& g, const Field& f) {
    Field df = radial_derivative(g, f, /*even_origin=*/true);
    Sums s;
    for (int i = 0; i < g.n; ++i) {
        const double a2 = f[i] * f[i];
        s.grad += g.qw[i] * df[i] * df[i];
        s.l6 += g.qw[i] * a2 * a2 * a2;
    }
    return s;
}

Sums grad_and_l6(const RadialGrid& g, const CField& f) {
    CField df = radial_derivative(g, f, /*even_origin=*/true);
    Sums s;
    for (int i = 0; i < g.n; ++i) {
        const double a2 = std::norm(f[i]);
        s.grad += g.qw[i] * std::norm(df[i]);
        s.l6 += g.qw[i] * a2 * a2 * a2;
    }
    return s;
}

}  // namespace

double energy(const RadialGrid& g, const FieldTriple& u, double alpha) {
    Sums s1 = grad_and_l6(g, u.u1), s2 = grad_and_l6(g, u.u2), s3 = grad_and_l6(g, u.u3);
    return 0.5 * (s1.grad + s2.grad + s3.grad) - (s1.l6 + s2.l6 + s3.l6) / 6.0 -
           alpha * coupling(g, u);
}

double energy(const RadialGrid& g, const CFieldTriple& psi, double alpha) {
    Sums s1 = grad_and_l6(g, psi.psi1), s2 = grad_and_l6(g, psi.psi2),
         s3 = grad_and_l6(g, psi.psi3);
    return 0.5 * (s1.grad + s2.grad + s3.grad) - (s1.l6 + s2.l6 + s3.l6) / 6.0 -
           alpha * coupling(g, psi);
}

double energy_limit(const RadialGrid& g, const FieldTriple& u, double alpha) {
    Sums s1 = grad_and_l6(g, u.u1), s2 = grad_and_l6(g, u.u2), s3 = grad_and_l6(g, u.u3);
    return 0.5 * (s1.grad + s2.grad + s3.grad) - alpha * coupling(g, u);
}

double pohozaev(const RadialGrid& g, const FieldTriple& u, double alpha) {
    FiberCoefficients c = fiber_coefficients(g, u);
    return c.grad_sq - c.sextic - 1.5 * alpha * c.coupling_;
}

double pohozaev(const RadialGrid& g, const CFieldTriple& psi, double alpha) {
    Sums s1 = grad_and_l6(g, psi.psi1), s2 = grad_and_l6(g, psi.psi2),
         s3 = grad_and_l6(g, psi.psi3);
    return (s1.grad + s2.grad + s3.grad) - (s1.l6 + s2.l6 + s3.l6) -
           1.5 * alpha * coupling(g, psi);
}

Field dilate(const RadialGrid& g, const Field& u, double s, double tol) {
    if (s <= 0) throw Error("dilate: scale must be positive");
    const double amp = std::pow(s, 1.5);
    Field v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = amp * interp_profile(g, u, s * g.r[i]);
    Norms nu = norms(g, u), nv = norms(g, v);
    if (nu.mass > 0) {
        const double drift = std::abs(nv.mass - nu.mass) / nu.mass;
        if (drift > tol)
            throw Error("dilate: mass drift " + std::to_string(drift) +
                        " exceeds tolerance (profile not resolved after rescaling)");
        if (nv.tail_frac > std::max(1e-4, 10.0 * nu.tail_frac))
            throw Error("dilate: rescaled profile carries tail mass outside the grid");
    }
    return v;
}

FieldTriple dilate(const RadialGrid& g, const FieldTriple& u, double s, double tol) {
    return {dilate(g, u.u1, s, tol), dilate(g, u.u2, s, tol), dilate(g, u.u3, s, tol)};
}

FiberCoefficients fiber_coefficients(const RadialGrid& g, const FieldTriple& u) {
    Sums s1 = grad_and_l6(g, u.u1), s2 = grad_and_l6(g, u.u2), s3 = grad_and_l6(g, u.u3);
    return {s1.grad + s2.grad + s3.grad, s1.l6 + s2.l6 + s3.l6, coupling(g, u)};
}

double fiber_value(const FiberCoefficients& c, double alpha, double s) {
    return 0.5 * s * s * c.grad_sq - s * s * s * s * s * s / 6.0 * c.sextic -
           std::pow(s, 1.5) * alpha * c.coupling_;
}

double fiber_d1(const FiberCoefficients& c, double alpha, double s) {
    return s * c.grad_sq - std::pow(s, 5) * c.sextic - 1.5 * std::sqrt(s) * alpha * c.coupling_;
}

double fiber_d2(const FiberCoefficients& c, double alpha, double s) {
    return c.grad_sq - 5.0 * std::pow(s, 4) * c.sextic -
           0.75 * alpha * c.coupling_ / std::sqrt(s);
}

namespace {

// polished root of fn on a sign-changing bracket
template <typename F, typename DF>
double refine_root(F fn, DF dfn, double lo, double hi) {
    double flo = fn(lo);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = fn(mid);
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15 * hi) break;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 40; ++it) {
        double f = fn(x), d = dfn(x);
        if (d == 0) break;
        double step = f / d;
        double xn = x - step;
        if (xn <= lo || xn >= hi) break;  // keep the bracket
        x = xn;
        if (std::abs(step) < 1e-14 * x) break;
    }
    return x;
}

}  // namespace

FiberAnalysis fiber_critical_points(const FiberCoefficients& c, double alpha) {
    if (c.coupling_ <= 0)
        throw Error("fiber_critical_points: coupling must be positive (state outside M)");
    if (c.sextic <= 0 || c.grad_sq <= 0)
        throw Error("fiber_critical_points: degenerate state");

    auto d1 = [&](double s) { return fiber_d1(c, alpha, s); };
    auto d2 = [&](double s) { return fiber_d2(c, alpha, s); };

    // scale guesses: the coupling/gradient balance near zero and the
    // gradient/sextic balance at the top of the hump
    const double s_lo_guess = std::pow(1.5 * alpha * c.coupling_ / c.grad_sq, 2.0);
    const double s_hi_guess = std::pow(c.grad_sq / c.sextic, 0.25);
    double a = 1e-6 * std::min(s_lo_guess, s_hi_guess);
    double b = 1e3 * std::max(s_lo_guess, s_hi_guess);

    // geometric sweep for the sign pattern (- + -) of Psi'
    const int N = 400;
    double prev_s = a, prev_f = d1(a);
    double up_lo = 0, up_hi = 0, down_lo = 0, down_hi = 0;
    const double step = std::pow(b / a, 1.0 / N);
    double s = a;
    for (int i = 1; i <= N; ++i) {
        s *= step;
        double f = d1(s);
        if (prev_f < 0 && f >= 0 && up_lo == 0) {
            up_lo = prev_s;
            up_hi = s;
        }
        if (prev_f >= 0 && f < 0 && up_lo != 0) {
            down_lo = prev_s;
            down_hi = s;
            break;
        }
        prev_s = s;
        prev_f = f;
    }
    if (up_lo == 0 || down_lo == 0)
        throw Error("fiber_critical_points: fiber has no positive section "
                    "(coupling too weak against gradient/sextic balance)");

    FiberAnalysis out;
    out.s_min = refine_root(d1, d2, up_lo, up_hi);
    out.s_max = refine_root(d1, d2, down_lo, down_hi);
    out.psi_min = fiber_value(c, alpha, out.s_min);
    out.psi_max = fiber_value(c, alpha, out.s_max);
    if (!(out.psi_min < 0 && out.psi_max > 0))
        throw Error("fiber_critical_points: fiber landscape degenerate "
                    "(expected negative dip and positive hump)");

    auto val = [&](double x) { return fiber_value(c, alpha, x); };
    out.zero_lo = refine_root(val, d1, out.s_min, out.s_max);
    // second zero: march right until Psi < 0
    double hi = 2.0 * out.s_max;
    while (val(hi) > 0) hi *= 2.0;
    out.zero_hi = refine_root(val, d1, out.s_max, hi);
    return out;
}

PohozaevClass classify_pohozaev(const FiberCoefficients& c, double alpha) {
    return fiber_d2(c, alpha, 1.0) > 0 ? PohozaevClass::plus : PohozaevClass::minus;
}

double h_value(const Constants& c, double rho) {
    return 0.5 * rho * rho - c.A1 * std::pow(rho, 6) - c.A2 * std::pow(rho, 1.5);
}

Constants geometry_constants(const PhysParams& p, double w_l2, double c_sob) {
    if (p.alpha <= 0) throw Error("geometry_constants: alpha must be positive");
    if (w_l2 <= 0 || c_sob <= 0) throw Error("geometry_constants: bad reference constants");
    Constants c;
    c.alpha = p.alpha;
    c.a1 = p.a1;
    c.a2 = p.a2;
    c.w_l2 = w_l2;
    c.c_sob = c_sob;
    c.c_gn = std::cbrt(2.0 / w_l2);
    const double a23 = std::pow(p.alpha, 2.0 / 3.0);
    c.D = std::pow(2.0, 2.0 / 3.0) * std::pow(c_sob, 0.25) * std::pow(w_l2, 2.0 / 3.0) /
          (std::pow(3.0, 11.0 / 12.0) * a23);
    c.D0 = 4.0 * std::pow(c_sob, 0.25) * std::pow(w_l2, 2.0 / 3.0) /
           (std::pow(3.0, 5.0 / 3.0) * a23);
    c.A1 = 1.0 / (6.0 * c_sob * c_sob * c_sob);
    const double amax = std::max(p.a1, p.a2);
    c.A2 = 2.0 * p.alpha * std::pow(amax, 1.5) / (std::pow(3.0, 0.75) * w_l2);
    c.rho0 = std::pow(18.0 * c.A1, -0.25);
    c.rho_bar = std::pow(54.0 * c.A1, -0.25);
    c.h_at_rho0 = h_value(c, c.rho0);

    if (c.h_at_rho0 > 0) {
        // roots of h on (0, rho0) and (rho0, inf)
        auto h = [&](double rho) { return h_value(c, rho); };
        double lo = c.rho0;
        while (h(lo) > 0 && lo > 1e-300) lo *= 0.5;
        double hi = c.rho0;
        {
            double a = lo, b = c.rho0;
            for (int i = 0; i < 200 && (b - a) > 1e-15 * c.rho0; ++i) {
                double m = 0.5 * (a + b);
                (h(m) > 0 ? b : a) = m;
            }
            c.R0 = 0.5 * (a + b);
        }
        hi = c.rho0;
        while (h(hi) > 0) hi *= 2.0;
        {
            double a = c.rho0, b = hi;
            for (int i = 0; i < 200 && (b - a) > 1e-15 * b; ++i) {
                double m = 0.5 * (a + b);
                (h(m) > 0 ? a : b) = m;
            }
            c.R1 = 0.5 * (a + b);
        }
    } else {
        c.R0 = c.R1 = c.rho0;  // degenerate (amax >= D collapses the window)
    }
    return c;
}

CFieldTriple gauge_apply(const CFieldTriple& psi, double th1, double th2) {
    CFieldTriple out = psi;
    const std::complex<double> e1 = std::polar(1.0, th1);
    const std::complex<double> e2 = std::polar(1.0, th2);
    const std::complex<double> e3 = std::polar(1.0, th1 + th2);
    for (auto& z : out.psi1) z *= e1;
    for (auto& z : out.psi2) z *= e2;
    for (auto& z : out.psi3) z *= e3;
    return out;
}

}  // namespace threewave
