#include "threewave/reference.hpp"

#include <cmath>
#include <numbers>

namespace threewave {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

struct OdeState {
    double w, dw;
};

// W'' = W - W^2 - (2/r) W', with the r = 0 limit W'' = (W - W^2)/3
inline double accel(double r, double w, double dw) {
    const double f = w - w * w;
    if (r == 0.0) return f / 3.0;
    return f - 2.0 * dw / r;
}

inline OdeState rk4_step(double r, OdeState s, double h) {
    const double k1w = s.dw, k1v = accel(r, s.w, s.dw);
    const double k2w = s.dw + 0.5 * h * k1v,
                 k2v = accel(r + 0.5 * h, s.w + 0.5 * h * k1w, s.dw + 0.5 * h * k1v);
    const double k3w = s.dw + 0.5 * h * k2v,
                 k3v = accel(r + 0.5 * h, s.w + 0.5 * h * k2w, s.dw + 0.5 * h * k2v);
    const double k4w = s.dw + h * k3v,
                 k4v = accel(r + h, s.w + h * k3w, s.dw + h * k3v);
    return {s.w + h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w),
            s.dw + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)};
}

enum class ShotOutcome { crossed, fell_back, undecided };

// march to R; overshoot = W dips through zero, undershoot = W turns back up
ShotOutcome classify_shot(double b, double R, double h) {
    OdeState s{b, 0.0};
    double r = 0;
    while (r < R) {
        s = rk4_step(r, s, h);
        r += h;
        if (s.w < 0) return ShotOutcome::crossed;
        if (s.dw > 0 && s.w < 1.0) return ShotOutcome::fell_back;
    }
    return ShotOutcome::undecided;
}

}  // namespace

SolitonW solve_W(int n, double R) {
    SolitonW out;
    out.grid = RadialGrid(n, R);
    const double dr = out.grid.dr;
    const int sub = std::max(1, (int)std::ceil(dr / 0.002));
    const double h = dr / sub;

    double b_lo = 1.0, b_hi = 20.0;
    if (classify_shot(b_lo, R, h) == ShotOutcome::crossed ||
        classify_shot(b_hi, R, h) != ShotOutcome::crossed)
        throw Error("solve_W: shooting bracket [1,20] does not separate outcomes");
    for (int it = 0; it < 80 && (b_hi - b_lo) > 1e-15 * b_hi; ++it) {
        const double mid = 0.5 * (b_lo + b_hi);
        (classify_shot(mid, R, h) == ShotOutcome::crossed ? b_hi : b_lo) = mid;
    }
    out.b0 = 0.5 * (b_lo + b_hi);

    // final pass on the tuned b, switching to the e^{-r}/r tail model once the
    // profile is small enough that the shooting instability would take over
    out.profile.assign(n, 0.0);
    out.dprofile.assign(n, 0.0);
    const double w_patch = 1e-8;
    OdeState s{out.b0, 0.0};
    double r = 0;
    bool patched = false;
    out.r_patch = R;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < sub; ++k) {
            if (!patched) {
                s = rk4_step(r, s, h);
            }
            r += h;
        }
        if (!patched && (s.w < w_patch || s.w < 0 || s.dw > 0)) {
            patched = true;
            out.r_patch = r;
            out.tail_amp = std::max(s.w, 0.0) * r * std::exp(r);
        }
        if (patched) {
            out.profile[i] = out.tail_amp * std::exp(-r) / r;
            out.dprofile[i] = -out.profile[i] * (1.0 + 1.0 / r);
        } else {
            out.profile[i] = s.w;
            out.dprofile[i] = s.dw;
        }
    }
    if (!patched) {
        out.r_patch = R;
        out.tail_amp = std::max(s.w, 0.0) * R * std::exp(R);
    }

    double m = 0, g2 = 0, c3 = 0;
    for (int i = 0; i < n; ++i) {
        const double w = out.profile[i], dw = out.dprofile[i];
        m += out.grid.qw[i] * w * w;
        g2 += out.grid.qw[i] * dw * dw;
        c3 += out.grid.qw[i] * w * w * w;
    }
    out.mass = m;
    out.grad_sq = g2;
    out.cubic = c3;
    out.l2 = std::sqrt(m);
    return out;
}

double soliton_value(const SolitonW& w, double rho) {
    rho = std::abs(rho);
    if (rho >= w.r_patch || rho >= w.grid.R)
        return rho > 0 ? w.tail_amp * std::exp(-rho) / rho : w.b0;
    return interp_profile(w.grid, w.profile, rho);
}

namespace {

// int_R^inf r^4 (e^2 + r^2)^{-3} dr and int_R^inf r^2 (e^2 + r^2)^{-3} dr by
// the binomial expansion of (1 + e^2/r^2)^{-3}; converges fast for R >> e.
double tail_pow(double eps, double R, int r_pow) {
    // integrand r^{r_pow - 6} (1 + (eps/r)^2)^{-3}
    double acc = 0;
    double e2k = 1.0;
    for (int k = 0; k < 8; ++k) {
        const double c_k = (k % 2 ? -1.0 : 1.0) * (k + 2) * (k + 1) / 2.0;
        const double p = 6 - r_pow + 2 * k - 1;  // integral gives R^{-p}/p
        acc += c_k * e2k / (p * std::pow(R, p));
        e2k *= eps * eps;
    }
    return acc;
}

}  // namespace

double sobolev_constant(const RadialGrid& g, double eps) {
    if (g.R < 8 * eps)
        throw Error("sobolev_constant: domain too small against the bubble scale");
    const double amp = std::pow(3.0, 0.25) * std::sqrt(eps);
    Field grad_density(g.n), six_density(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double r = g.r[i];
        const double q = eps * eps + r * r;
        const double u = amp / std::sqrt(q);
        const double du = -amp * r / (q * std::sqrt(q));
        grad_density[i] = du * du;
        six_density[i] = std::pow(u, 6);
    }
    const double s3 = std::sqrt(3.0);
    const double grad_tail = kFourPi * s3 * eps * tail_pow(eps, g.R, 4);
    const double six_tail = kFourPi * s3 * s3 * s3 * eps * eps * eps * tail_pow(eps, g.R, 2);
    const double grad = integrate_radial(g, grad_density, grad_tail);
    const double six = integrate_radial(g, six_density, six_tail);
    return grad / std::pow(six, 1.0 / 3.0);
}

Bubble cutoff_bubble(const RadialGrid& g, double eps) {
    if (g.R <= 2.0) throw Error("cutoff_bubble: grid must extend past the cutoff shell r=2");
    if (eps <= 0) throw Error("cutoff_bubble: eps must be positive");
    Bubble b;
    b.eps = eps;
    b.profile.assign(g.n, 0.0);
    b.dprofile.assign(g.n, 0.0);
    const double amp = std::pow(3.0, 0.25) * std::sqrt(eps);
    for (int i = 0; i < g.n; ++i) {
        const double r = g.r[i];
        if (r >= 2.0) break;
        const double q = eps * eps + r * r;
        const double u = amp / std::sqrt(q);
        const double du = -amp * r / (q * std::sqrt(q));
        double chi = 1.0, dchi = 0.0;
        if (r > 1.0) {
            chi = 0.5 * (1.0 + std::cos(std::numbers::pi * (r - 1.0)));
            dchi = -0.5 * std::numbers::pi * std::sin(std::numbers::pi * (r - 1.0));
        }
        b.profile[i] = chi * u;
        b.dprofile[i] = chi * du + dchi * u;
    }
    double g2 = 0, l6 = 0, m = 0;
    for (int i = 0; i < g.n; ++i) {
        const double u = b.profile[i], du = b.dprofile[i];
        g2 += g.qw[i] * du * du;
        m += g.qw[i] * u * u;
        l6 += g.qw[i] * u * u * u * u * u * u;
    }
    b.grad_sq = g2;
    b.l6 = l6;
    b.mass = m;
    return b;
}

Soliton single_soliton(const RadialGrid& g, const SolitonW& w, double alpha, double a,
                       double tail_tol) {
    if (alpha <= 0 || a <= 0) throw Error("single_soliton: alpha and a must be positive");
    Soliton s;
    s.lambda = std::pow(alpha, 4) * std::pow(a, 4) / (w.mass * w.mass);
    const double rl = std::sqrt(s.lambda);
    s.profile.assign(g.n, 0.0);
    for (int i = 0; i < g.n; ++i) s.profile[i] = s.lambda / alpha * soliton_value(w, rl * g.r[i]);
    Field sq(g.n);
    for (int i = 0; i < g.n; ++i) sq[i] = s.profile[i] * s.profile[i];
    const double m = integrate_radial(g, sq);
    if (std::abs(m - a * a) > tail_tol * a * a)
        throw Error("single_soliton: soliton at this mass/coupling is not resolved by the "
                    "grid (sqrt(lambda) R too small)");
    return s;
}

double j0_functional(const RadialGrid& g, const Field& u, double alpha) {
    Field du = radial_derivative(g, u, /*even_origin=*/true);
    double g2 = 0, c3 = 0;
    for (int i = 0; i < g.n; ++i) {
        g2 += g.qw[i] * du[i] * du[i];
        c3 += g.qw[i] * u[i] * u[i] * u[i];
    }
    return 0.5 * g2 - alpha / 3.0 * c3;
}

double m0_single(const SolitonW& w, double alpha, double a) {
    return -std::pow(alpha, 4) * std::pow(a, 6) / (6.0 * w.mass * w.mass);
}

}  // namespace threewave
