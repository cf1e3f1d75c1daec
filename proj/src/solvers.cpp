#include "threewave/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "threewave/transform.hpp"

namespace threewave {

namespace {

double inner3(const RadialGrid& g, const FieldTriple& a, const FieldTriple& b) {
    return inner(g, a.u1, b.u1) + inner(g, a.u2, b.u2) + inner(g, a.u3, b.u3);
}

void clamp_nonneg(FieldTriple& u) {
    for (Field* f : {&u.u1, &u.u2, &u.u3})
        for (double& x : *f)
            if (x < 0) x = 0;
}

double pow5(double x) { return x * x * x * x * x; }

// Nonnegativity is enforced by clamping, so a node sitting at zero admits no
// feasible descent when the gradient there points outward.  Zeroing those
// entries makes the norm and the search direction refer to the constrained
// (KKT) stationarity condition.
void mask_blocked(Field& grad, const Field& u) {
    for (size_t i = 0; i < u.size(); ++i)
        if (u[i] <= 0.0 && grad[i] > 0.0) grad[i] = 0.0;
}

void mask_blocked(FieldTriple& grad, const FieldTriple& u) {
    mask_blocked(grad.u1, u.u1);
    mask_blocked(grad.u2, u.u2);
    mask_blocked(grad.u3, u.u3);
}

// multiplier-free part of the stationary residual:
//   F1 = -Lap u1 - u1^5 - alpha u3 u2   (and cyclically; quintic optional)
FieldTriple lambda_free(const RadialGrid& g, const FieldTriple& u, double alpha,
                        bool with_sextic) {
    FieldTriple F{radial_laplacian(g, u.u1), radial_laplacian(g, u.u2),
                  radial_laplacian(g, u.u3)};
    for (int i = 0; i < g.n; ++i) {
        const double q1 = with_sextic ? pow5(u.u1[i]) : 0.0;
        const double q2 = with_sextic ? pow5(u.u2[i]) : 0.0;
        const double q3 = with_sextic ? pow5(u.u3[i]) : 0.0;
        F.u1[i] = -F.u1[i] - q1 - alpha * u.u2[i] * u.u3[i];
        F.u2[i] = -F.u2[i] - q2 - alpha * u.u1[i] * u.u3[i];
        F.u3[i] = -F.u3[i] - q3 - alpha * u.u1[i] * u.u2[i];
    }
    return F;
}

struct ComponentMasses {
    double m1 = 0, m2 = 0, m3 = 0;
};

ComponentMasses component_masses(const RadialGrid& g, const FieldTriple& u) {
    return {inner(g, u.u1, u.u1), inner(g, u.u2, u.u2), inner(g, u.u3, u.u3)};
}

void check_nondegenerate(const ComponentMasses& m, const char* who) {
    const double scale = m.m1 + m.m2 + m.m3;
    if (!(scale > 0) || m.m1 <= 1e-14 * scale || m.m2 <= 1e-14 * scale ||
        m.m3 <= 1e-14 * scale)
        throw Error(std::string(who) + ": degenerate constraint (a component is numerically zero)");
}

// Multipliers from precomputed pairings b = (<u1,F1>+<u3,F3>, <u2,F2>+<u3,F3>).
std::pair<double, double> solve_multiplier_system(const ComponentMasses& m, double b1,
                                                  double b2) {
    const double a11 = m.m1 + m.m3, a22 = m.m2 + m.m3, a12 = m.m3;
    const double det = a11 * a22 - a12 * a12;  // = m1 m2 + m1 m3 + m2 m3 > 0
    return {(-b1 * a22 + b2 * a12) / det, (-b2 * a11 + b1 * a12) / det};
}

std::pair<double, double> multipliers_of(const RadialGrid& g, const FieldTriple& u,
                                         const FieldTriple& F) {
    ComponentMasses m = component_masses(g, u);
    check_nondegenerate(m, "multiplier solve");
    const double b3 = inner(g, u.u3, F.u3);
    return solve_multiplier_system(m, inner(g, u.u1, F.u1) + b3,
                                   inner(g, u.u2, F.u2) + b3);
}

// Remove the components of d along the constraint gradients (u1,0,u3) and
// (0,u2,u3).  The mass re-projection is an oblique rescale, not an orthogonal
// projection, so a non-tangent step picks up an O(step) correction that would
// invalidate the line-search slope; a tangent step keeps it at O(step^2).
void tangentialize(const RadialGrid& g, const FieldTriple& u, FieldTriple& d) {
    ComponentMasses m = component_masses(g, u);
    const double g11 = m.m1 + m.m3, g22 = m.m2 + m.m3, g12 = m.m3;
    const double r1 = inner(g, d.u1, u.u1) + inner(g, d.u3, u.u3);
    const double r2 = inner(g, d.u2, u.u2) + inner(g, d.u3, u.u3);
    const double det = g11 * g22 - g12 * g12;
    const double b1 = (r1 * g22 - r2 * g12) / det;
    const double b2 = (r2 * g11 - r1 * g12) / det;
    for (int i = 0; i < g.n; ++i) {
        d.u1[i] -= b1 * u.u1[i];
        d.u2[i] -= b2 * u.u2[i];
        d.u3[i] -= (b1 + b2) * u.u3[i];
    }
}

// Exact rescale (theta1, theta2, theta3 = sqrt(theta1 theta2)) onto S(a1,a2)
// from precomputed component masses.  With t = theta3^2 the constraints
// reduce to the quadratic
//   (m1 m2 - m3^2) t^2 + m3 (a1^2 + a2^2) t - a1^2 a2^2 = 0,
// whose admissible root is t = 2 a1^2 a2^2 / (B + sqrt(disc)) with
// B = m3 (a1^2 + a2^2) and disc = m3^2 (a1^2 - a2^2)^2 + 4 m1 m2 a1^2 a2^2.
void rescale_to_masses(FieldTriple& u, const ComponentMasses& m, double a1sq, double a2sq,
                       const char* who) {
    check_nondegenerate(m, who);
    const double B = m.m3 * (a1sq + a2sq);
    const double d12 = m.m3 * (a1sq - a2sq);
    const double disc = d12 * d12 + 4.0 * m.m1 * m.m2 * a1sq * a2sq;
    const double t = 2.0 * a1sq * a2sq / (B + std::sqrt(disc));
    const double x = (a1sq - m.m3 * t) / m.m1;
    const double y = (a2sq - m.m3 * t) / m.m2;
    if (!(t > 0) || !(x > 0) || !(y > 0))
        throw Error(std::string(who) + ": no positive rescaling exists");
    const double th1 = std::sqrt(x), th2 = std::sqrt(y), th3 = std::sqrt(t);
    for (double& v : u.u1) v *= th1;
    for (double& v : u.u2) v *= th2;
    for (double& v : u.u3) v *= th3;
}

}  // namespace

// Two passes polish roundoff so the masses land at ~1e-15 relative.
void project_masses(const RadialGrid& g, FieldTriple& u, double a1sq, double a2sq) {
    for (int pass = 0; pass < 2; ++pass)
        rescale_to_masses(u, component_masses(g, u), a1sq, a2sq, "mass projection");
}

namespace {

Field gaussian_blob(const RadialGrid& g, double width, double target_mass_sq) {
    Field f(g.n);
    for (int i = 0; i < g.n; ++i) f[i] = std::exp(-g.r[i] * g.r[i] / (2 * width * width));
    const double s = std::sqrt(target_mass_sq / inner(g, f, f));
    for (double& v : f) v *= s;
    return f;
}

// single-soliton profile at mass parameter am, falling back to a broad
// Gaussian when the soliton does not fit the grid (only possible for inits;
// the projection afterwards makes all masses exact).
Field component_init(const RadialGrid& g, const SolitonW& w, double alpha, double am) {
    try {
        return single_soliton(g, w, alpha, am, 0.5).profile;
    } catch (const Error&) {
        return gaussian_blob(g, g.R / 6.0, am * am);
    }
}

FieldTriple default_ground_init(const RadialGrid& g, const SolitonW& w, double alpha,
                                double a1sq, double a2sq) {
    const double m3 = 0.5 * std::min(a1sq, a2sq);
    return {component_init(g, w, alpha, std::sqrt(a1sq - m3)),
            component_init(g, w, alpha, std::sqrt(a2sq - m3)),
            component_init(g, w, alpha, std::sqrt(m3))};
}

struct FlowConfig {
    double alpha = 0;
    double a1sq = 0, a2sq = 0;
    bool with_sextic = true;
    double rho0_sq = 0;  // <= 0 disables the gradient-ball guard
    const char* label = "flow";
};

double flow_energy(const RadialGrid& g, const FieldTriple& u, const FlowConfig& fc) {
    return fc.with_sextic ? energy(g, u, fc.alpha) : energy_limit(g, u, fc.alpha);
}

double pohozaev_of(const FiberCoefficients& cf, double alpha, bool with_sextic) {
    return cf.grad_sq - (with_sextic ? cf.sextic : 0.0) - 1.5 * alpha * cf.coupling_;
}

void record_symmetry_defect(StationaryState& st, const FlowConfig& fc) {
    if (std::abs(fc.a1sq - fc.a2sq) > 1e-12 * (fc.a1sq + fc.a2sq)) return;
    double d = 0;
    for (size_t i = 0; i < st.u.u1.size(); ++i)
        d = std::max(d, std::abs(st.u.u1[i] - st.u.u2[i]));
    st.symmetry_defect = d;
}

// Damped preconditioned descent with exact mass re-projection; shared by the
// ground flow, the limit flow and (after reduction) nothing else.
StationaryState descend(const RadialGrid& g, const FlowConfig& fc, const SolverOptions& opts,
                        FieldTriple u) {
    clamp_nonneg(u);
    project_masses(g, u, fc.a1sq, fc.a2sq);

    const double k1sq = std::pow(M_PI / g.R, 2);  // first Dirichlet eigenvalue
    double E = flow_energy(g, u, fc);
    double tau = opts.step0;

    StationaryState st;
    int it = 0;
    int plateau = 0;
    for (; it < opts.max_iter; ++it) {
        FiberCoefficients cf = fiber_coefficients(g, u);
        if (!(cf.coupling_ > 0))
            throw Error(std::string(fc.label) + ": iterate left the coupling cone M");
        if (fc.rho0_sq > 0 && cf.grad_sq > fc.rho0_sq)
            throw Error(std::string(fc.label) +
                        ": iterate left the gradient ball B_rho0 (landscape geometry violated)");

        FieldTriple G = lambda_free(g, u, fc.alpha, fc.with_sextic);
        auto [l1, l2] = multipliers_of(g, u, G);
        for (int i = 0; i < g.n; ++i) {
            G.u1[i] += l1 * u.u1[i];
            G.u2[i] += l2 * u.u2[i];
            G.u3[i] += (l1 + l2) * u.u3[i];
        }
        mask_blocked(G, u);
        const double pg = std::sqrt(inner3(g, G, G));
        const double P = pohozaev_of(cf, fc.alpha, fc.with_sextic);
        if (pg <= opts.tol * std::max(1.0, cf.grad_sq) &&
            std::abs(P) <= opts.pohozaev_tol * cf.grad_sq) {
            st.converged = true;
            break;
        }
        // roundoff floor of the energy evaluation, set by the term magnitudes
        const double noise =
            1e-12 * (cf.grad_sq + cf.sextic + fc.alpha * std::abs(cf.coupling_));

        const double shift = std::max({l1 + l2, k1sq, 1e-12});
        FieldTriple d{solve_shifted_laplacian(g, G.u1, shift),
                      solve_shifted_laplacian(g, G.u2, shift),
                      solve_shifted_laplacian(g, G.u3, shift)};
        tangentialize(g, u, d);
        mask_blocked(d, u);
        double slope = inner3(g, G, d);
        if (!(slope > 0)) {  // preconditioner glitch: fall back to the plain direction
            d = G;
            slope = pg * pg;
        }

        bool accepted = false;
        double progress = 0;
        for (; tau >= opts.step_min; tau *= 0.5) {
            FieldTriple trial = u;
            for (int i = 0; i < g.n; ++i) {
                trial.u1[i] -= tau * d.u1[i];
                trial.u2[i] -= tau * d.u2[i];
                trial.u3[i] -= tau * d.u3[i];
            }
            clamp_nonneg(trial);
            try {
                project_masses(g, trial, fc.a1sq, fc.a2sq);
            } catch (const Error&) {
                continue;  // step destroyed a component; shorten
            }
            const double Et = flow_energy(g, trial, fc);
            if (Et <= E - 1e-4 * tau * slope) {
                progress = E - Et;
                u = std::move(trial);
                E = Et;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        // accepted decreases pinned at the roundoff floor mean the grid
        // cannot express further descent; stop creeping
        if (progress <= noise) {
            if (++plateau >= 8) break;
        } else {
            plateau = 0;
        }
        tau = std::min(tau * 1.5, opts.step_max);
    }

    // final certificates
    FieldTriple G = lambda_free(g, u, fc.alpha, fc.with_sextic);
    auto [l1, l2] = multipliers_of(g, u, G);
    for (int i = 0; i < g.n; ++i) {
        G.u1[i] += l1 * u.u1[i];
        G.u2[i] += l2 * u.u2[i];
        G.u3[i] += (l1 + l2) * u.u3[i];
    }
    FiberCoefficients cf = fiber_coefficients(g, u);
    st.residual_sup = std::max({sup_abs(G.u1), sup_abs(G.u2), sup_abs(G.u3)});
    mask_blocked(G, u);
    st.u = std::move(u);
    st.lambda1 = l1;
    st.lambda2 = l2;
    st.energy = flow_energy(g, st.u, fc);
    st.grad_sq = cf.grad_sq;
    st.pohozaev_residual = pohozaev_of(cf, fc.alpha, fc.with_sextic);
    st.pg_norm = std::sqrt(inner3(g, G, G));
    st.iterations = it;
    if (fc.with_sextic) {
        st.classification = classify_pohozaev(cf, fc.alpha);
    } else {
        // limit fiber s^2 G/2 - s^{3/2} alpha C: second derivative at s=1
        st.classification = (cf.grad_sq - 0.75 * fc.alpha * cf.coupling_ > 0)
                                ? PohozaevClass::plus
                                : PohozaevClass::minus;
    }
    record_symmetry_defect(st, fc);
    return st;
}

}  // namespace

FieldTriple energy_gradient(const RadialGrid& g, const FieldTriple& u, double alpha,
                            double lambda1, double lambda2, bool with_sextic) {
    FieldTriple G = lambda_free(g, u, alpha, with_sextic);
    for (int i = 0; i < g.n; ++i) {
        G.u1[i] += lambda1 * u.u1[i];
        G.u2[i] += lambda2 * u.u2[i];
        G.u3[i] += (lambda1 + lambda2) * u.u3[i];
    }
    return G;
}

std::pair<double, double> multiplier_solve(const RadialGrid& g, const FieldTriple& u,
                                           double alpha, bool with_sextic) {
    return multipliers_of(g, u, lambda_free(g, u, alpha, with_sextic));
}

StationaryState ground_state(const RadialGrid& g, const SolitonW& w, const Constants& geo,
                             const SolverOptions& opts, const FieldTriple* init) {
    if (!(std::max(geo.a1, geo.a2) < geo.D))
        throw Error("ground flow: subcritical mass threshold violated (max(a1,a2) >= D)");
    FlowConfig fc;
    fc.alpha = geo.alpha;
    fc.a1sq = geo.a1 * geo.a1;
    fc.a2sq = geo.a2 * geo.a2;
    fc.with_sextic = true;
    fc.rho0_sq = geo.rho0 * geo.rho0;
    fc.label = "ground flow";
    FieldTriple u = init ? *init : default_ground_init(g, w, geo.alpha, fc.a1sq, fc.a2sq);
    return descend(g, fc, opts, std::move(u));
}

StationaryState limit_ground_state(const RadialGrid& g, const SolitonW& w, double alpha,
                                   const SolverOptions& opts) {
    if (!(alpha > 0)) throw Error("limit flow: coupling alpha must be positive");
    FlowConfig fc;
    fc.alpha = alpha;
    fc.a1sq = 1.0;
    fc.a2sq = 1.0;
    fc.with_sextic = false;
    fc.rho0_sq = 0;  // no sextic term, no landscape ball
    fc.label = "limit flow";
    return descend(g, fc, opts, default_ground_init(g, w, alpha, 1.0, 1.0));
}

namespace {

// Uniform-node quadrature rho_i = 4 pi dr r_i^2.  For profiles that decay by
// the wall it is spectrally accurate (every odd derivative of r^2 f vanishes
// at the origin), and unlike the Simpson weights it makes <z, -Lap z>_rho an
// exact quadratic form whose rho-gradient is -2 Lap z.  The reduced flow
// iterates entirely in this metric so that line-search values and chain-rule
// gradients agree to machine precision even when an iterate develops
// structure near the grid scale; the public-quadrature certificates are
// recomputed once the flow is done.
struct ReducedMetric {
    Field rho;
    explicit ReducedMetric(const RadialGrid& g) : rho(g.n) {
        for (int i = 0; i < g.n; ++i) rho[i] = 4.0 * M_PI * g.dr * g.r[i] * g.r[i];
    }
    double dot(const Field& a, const Field& b) const {
        double s = 0;
        for (size_t i = 0; i < a.size(); ++i) s += rho[i] * a[i] * b[i];
        return s;
    }
    double dot3(const FieldTriple& a, const FieldTriple& b) const {
        return dot(a.u1, b.u1) + dot(a.u2, b.u2) + dot(a.u3, b.u3);
    }
    ComponentMasses masses(const FieldTriple& u) const {
        return {dot(u.u1, u.u1), dot(u.u2, u.u2), dot(u.u3, u.u3)};
    }
};

void project_masses_metric(const ReducedMetric& met, FieldTriple& u, double a1sq,
                           double a2sq) {
    for (int pass = 0; pass < 2; ++pass)
        rescale_to_masses(u, met.masses(u), a1sq, a2sq, "mass projection");
}

struct ReducedEval {
    FiberCoefficients cf;  // metric-consistent fiber integrals
    FiberAnalysis fa;
    FieldTriple lap;  // spectral Laplacians, reused by the gradient
};

ReducedEval reduced_eval(const RadialGrid& g, const ReducedMetric& met,
                         const FieldTriple& z, double alpha) {
    ReducedEval re;
    re.lap = FieldTriple{radial_laplacian(g, z.u1), radial_laplacian(g, z.u2),
                         radial_laplacian(g, z.u3)};
    re.cf.grad_sq = -met.dot3(z, re.lap);
    double sext = 0, coup = 0;
    for (int i = 0; i < g.n; ++i) {
        const double w = met.rho[i];
        const double c1 = z.u1[i] * z.u1[i] * z.u1[i];
        const double c2 = z.u2[i] * z.u2[i] * z.u2[i];
        const double c3 = z.u3[i] * z.u3[i] * z.u3[i];
        sext += w * (c1 * c1 + c2 * c2 + c3 * c3);
        coup += w * z.u1[i] * z.u2[i] * z.u3[i];
    }
    re.cf.sextic = sext;
    re.cf.coupling_ = coup;
    re.fa = fiber_critical_points(re.cf, alpha);
    return re;
}

}  // namespace

StationaryState excited_state(const RadialGrid& g, const SolitonW& w, const Constants& geo,
                              const StationaryState& ground, const SolverOptions& opts,
                              const FieldTriple* init) {
    (void)w;
    if (ground.sigma != 1.0)
        throw Error("excited flow: ground reference must be an undilated state");
    const double a1sq = geo.a1 * geo.a1, a2sq = geo.a2 * geo.a2;
    const double alpha = geo.alpha;
    const double window_width = std::pow(geo.c_sob, 1.5) / 3.0;

    FieldTriple z;
    if (init) {
        z = *init;
    } else {
        z = ground.u;
        Bubble bub = cutoff_bubble(g, 0.1);
        for (int i = 0; i < g.n; ++i) z.u1[i] += bub.profile[i];
    }
    const ReducedMetric met(g);
    clamp_nonneg(z);
    project_masses_metric(met, z, a1sq, a2sq);

    const double k1sq = std::pow(M_PI / g.R, 2);
    ReducedEval re = reduced_eval(g, met, z, alpha);  // throws if the fiber hump is absent
    double F = re.fa.psi_max;
    double tau = opts.step0;

    StationaryState st;
    double pg = 0;
    double res_sup = 0;  // sup of the unmasked reduced residual
    int it = 0;
    int plateau = 0;
    for (; it < opts.max_iter; ++it) {
        double sigma = re.fa.s_max;

        // re-center the scale gauge when the dilation is grid-resolvable
        if (std::abs(sigma - 1.0) > 0.2 && sigma > 0.25 && sigma < 4.0) {
            try {
                FieldTriple zc = dilate(g, z, sigma, opts.dilate_tol);
                clamp_nonneg(zc);
                project_masses_metric(met, zc, a1sq, a2sq);
                ReducedEval rec = reduced_eval(g, met, zc, alpha);
                z = std::move(zc);
                re = std::move(rec);
                F = re.fa.psi_max;
                sigma = re.fa.s_max;
            } catch (const Error&) {
                // unresolvable or structure-degrading re-center: keep the gauge
            }
        }

        const double s2 = sigma * sigma;
        const double s6 = s2 * s2 * s2;
        const double s32 = sigma * std::sqrt(sigma);
        // roundoff floor of the fiber value, set by the term magnitudes
        const double noise = 1e-12 * (s2 * re.cf.grad_sq + s6 * re.cf.sextic +
                                      s32 * alpha * std::abs(re.cf.coupling_));

        // exact metric gradient of F(z) = Psi_z(sigma) at frozen sigma
        FieldTriple R{Field(g.n), Field(g.n), Field(g.n)};
        for (int i = 0; i < g.n; ++i) {
            R.u1[i] =
                -s2 * re.lap.u1[i] - s6 * pow5(z.u1[i]) - s32 * alpha * z.u2[i] * z.u3[i];
            R.u2[i] =
                -s2 * re.lap.u2[i] - s6 * pow5(z.u2[i]) - s32 * alpha * z.u1[i] * z.u3[i];
            R.u3[i] =
                -s2 * re.lap.u3[i] - s6 * pow5(z.u3[i]) - s32 * alpha * z.u1[i] * z.u2[i];
        }
        {
            ComponentMasses m = met.masses(z);
            check_nondegenerate(m, "excited flow");
            const double b1 = met.dot(z.u1, R.u1) + met.dot(z.u3, R.u3);
            const double b2 = met.dot(z.u2, R.u2) + met.dot(z.u3, R.u3);
            auto [l1, l2] = solve_multiplier_system(m, b1, b2);
            for (int i = 0; i < g.n; ++i) {
                R.u1[i] += l1 * z.u1[i];
                R.u2[i] += l2 * z.u2[i];
                R.u3[i] += (l1 + l2) * z.u3[i];
            }
            st.lambda1 = l1;
            st.lambda2 = l2;
        }
        res_sup = std::max({sup_abs(R.u1), sup_abs(R.u2), sup_abs(R.u3)});
        mask_blocked(R, z);
        pg = std::sqrt(met.dot3(R, R));
        if (pg <= opts.tol * std::max(1.0, s2 * re.cf.grad_sq)) {
            st.converged = true;
            break;
        }

        const double shift = std::max({(st.lambda1 + st.lambda2) / s2, k1sq, 1e-12});
        FieldTriple d{solve_shifted_laplacian(g, R.u1, shift),
                      solve_shifted_laplacian(g, R.u2, shift),
                      solve_shifted_laplacian(g, R.u3, shift)};
        for (Field* f : {&d.u1, &d.u2, &d.u3})
            for (double& x : *f) x /= s2;
        {
            // remove the constraint-normal part of d in the flow metric
            ComponentMasses m = met.masses(z);
            const double g11 = m.m1 + m.m3, g22 = m.m2 + m.m3, g12 = m.m3;
            const double det = g11 * g22 - g12 * g12;
            if (det > 0) {
                const double r1 = met.dot(d.u1, z.u1) + met.dot(d.u3, z.u3);
                const double r2 = met.dot(d.u2, z.u2) + met.dot(d.u3, z.u3);
                const double b1 = (r1 * g22 - r2 * g12) / det;
                const double b2 = (r2 * g11 - r1 * g12) / det;
                for (int i = 0; i < g.n; ++i) {
                    d.u1[i] -= b1 * z.u1[i];
                    d.u2[i] -= b2 * z.u2[i];
                    d.u3[i] -= (b1 + b2) * z.u3[i];
                }
            }
        }
        mask_blocked(d, z);
        double slope = met.dot3(R, d);
        if (!(slope > 0)) {
            d = R;
            slope = pg * pg;
        }

        bool accepted = false;
        double progress = 0;
        for (; tau >= opts.step_min; tau *= 0.5) {
            FieldTriple trial = z;
            for (int i = 0; i < g.n; ++i) {
                trial.u1[i] -= tau * d.u1[i];
                trial.u2[i] -= tau * d.u2[i];
                trial.u3[i] -= tau * d.u3[i];
            }
            clamp_nonneg(trial);
            ReducedEval ret;
            try {
                project_masses_metric(met, trial, a1sq, a2sq);
                ret = reduced_eval(g, met, trial, alpha);
            } catch (const Error&) {
                continue;  // left M or lost the hump: shorten the step
            }
            if (ret.fa.psi_max <= F - 1e-4 * tau * slope) {
                progress = F - ret.fa.psi_max;
                z = std::move(trial);
                re = std::move(ret);
                F = re.fa.psi_max;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        // accepted decreases pinned at the roundoff floor mean the grid
        // cannot express further descent (typically an unresolved bubble
        // scale); stop creeping
        if (progress <= noise) {
            if (++plateau >= 8) break;
        } else {
            plateau = 0;
        }
        tau = std::min(tau * 1.5, opts.step_max);
    }

    st.iterations = it;
    st.pg_norm = pg;  // flow-metric norm of the masked reduced gradient
    st.residual_sup = res_sup;

    // Re-project and re-analyze with the public quadrature so the reported
    // certificates are consistent with the rest of the library (the two
    // quadratures agree to spectral accuracy on resolved profiles).
    project_masses(g, z, a1sq, a2sq);
    FiberCoefficients cfz;
    double sigma = 1.0;
    try {
        cfz = fiber_coefficients(g, z);
        sigma = fiber_critical_points(cfz, alpha).s_max;
    } catch (const Error&) {
        throw Error("excited flow: fiber structure lost at the final iterate");
    }

    // Certificates at the dilated representative sigma * z.  Materialize the
    // dilation when it stays on the grid; otherwise keep z and transport every
    // scalar through the dilation in closed form.
    bool materialized = false;
    if (sigma > 0.25 && sigma < 4.0) {
        try {
            FieldTriple v = dilate(g, z, sigma, opts.dilate_tol);
            clamp_nonneg(v);
            project_masses(g, v, a1sq, a2sq);
            FieldTriple G = lambda_free(g, v, alpha, true);
            auto [l1, l2] = multipliers_of(g, v, G);
            for (int i = 0; i < g.n; ++i) {
                G.u1[i] += l1 * v.u1[i];
                G.u2[i] += l2 * v.u2[i];
                G.u3[i] += (l1 + l2) * v.u3[i];
            }
            FiberCoefficients cf = fiber_coefficients(g, v);
            st.u = std::move(v);
            st.sigma = 1.0;
            st.lambda1 = l1;
            st.lambda2 = l2;
            st.energy = energy(g, st.u, alpha);
            st.grad_sq = cf.grad_sq;
            st.pohozaev_residual = pohozaev_of(cf, alpha, true);
            st.classification = classify_pohozaev(cf, alpha);
            st.residual_sup = std::max({sup_abs(G.u1), sup_abs(G.u2), sup_abs(G.u3)});
            mask_blocked(G, st.u);
            st.pg_norm = std::sqrt(inner3(g, G, G));
            materialized = true;
        } catch (const Error&) {
            materialized = false;
        }
    }
    if (!materialized) {
        const double s2 = sigma * sigma;
        const double s6 = s2 * s2 * s2;
        const double s32 = sigma * std::sqrt(sigma);
        ComponentMasses m = component_masses(g, z);
        check_nondegenerate(m, "excited flow");
        Field q1(g.n), q2(g.n), q3(g.n);
        for (int i = 0; i < g.n; ++i) {
            q1[i] = pow5(z.u1[i]);
            q2[i] = pow5(z.u2[i]);
            q3[i] = pow5(z.u3[i]);
        }
        Field lap1 = radial_laplacian(g, z.u1), lap2 = radial_laplacian(g, z.u2),
              lap3 = radial_laplacian(g, z.u3);
        const double C = cfz.coupling_;
        // pairings <v_j, F_j(v)> at v = sigma * z, written in z-integrals
        const double b1 = -s2 * inner(g, z.u1, lap1) - s6 * inner(g, z.u1, q1) -
                          s32 * alpha * C;
        const double b2 = -s2 * inner(g, z.u2, lap2) - s6 * inner(g, z.u2, q2) -
                          s32 * alpha * C;
        const double b3 = -s2 * inner(g, z.u3, lap3) - s6 * inner(g, z.u3, q3) -
                          s32 * alpha * C;
        auto [l1, l2] = solve_multiplier_system(m, b1 + b3, b2 + b3);
        FiberCoefficients cfv{s2 * cfz.grad_sq, s6 * cfz.sextic, s32 * cfz.coupling_};
        st.u = std::move(z);
        st.sigma = sigma;
        st.lambda1 = l1;
        st.lambda2 = l2;
        st.energy = fiber_value(cfz, alpha, sigma);
        st.grad_sq = cfv.grad_sq;
        st.pohozaev_residual = sigma * fiber_d1(cfz, alpha, sigma);
        st.classification = classify_pohozaev(cfv, alpha);
    }

    st.energy_window_ok =
        st.energy > ground.energy && st.energy < ground.energy + window_width;
    if (std::abs(a1sq - a2sq) <= 1e-12 * (a1sq + a2sq)) {
        double dsym = 0;
        for (int i = 0; i < g.n; ++i)
            dsym = std::max(dsym, std::abs(st.u.u1[i] - st.u.u2[i]));
        st.symmetry_defect = dsym;
    }
    return st;
}

ScalarState minimize_j0(const RadialGrid& g, const SolitonW& w, double alpha, double a,
                        const SolverOptions& opts) {
    if (!(alpha > 0) || !(a > 0)) throw Error("scalar flow: alpha and a must be positive");
    const double asq = a * a;
    const double k1sq = std::pow(M_PI / g.R, 2);
    const ReducedMetric met(g);

    // flow-metric value of J0; the spectral Laplacian is the exact metric
    // gradient of the quadratic part, so line search and gradient agree
    auto value_of = [&](const Field& v, const Field& lap) {
        double cubic = 0;
        for (int i = 0; i < g.n; ++i) cubic += met.rho[i] * v[i] * v[i] * v[i];
        return -0.5 * met.dot(v, lap) - (alpha / 3.0) * cubic;
    };

    Field u = component_init(g, w, alpha, a);
    for (double& x : u)
        if (x < 0) x = 0;
    const double s0 = std::sqrt(asq / met.dot(u, u));
    for (double& x : u) x *= s0;

    Field lap = radial_laplacian(g, u);
    double E = value_of(u, lap);
    double tau = opts.step0;
    ScalarState st;
    int it = 0;
    int plateau = 0;
    for (; it < opts.max_iter; ++it) {
        Field F(g.n);
        for (int i = 0; i < g.n; ++i) F[i] = -lap[i] - alpha * u[i] * u[i];
        const double lambda = -met.dot(u, F) / asq;
        Field G = F;
        for (int i = 0; i < g.n; ++i) G[i] += lambda * u[i];
        mask_blocked(G, u);
        const double pg = std::sqrt(met.dot(G, G));
        const double gsq = -met.dot(u, lap);
        st.lambda = lambda;
        if (pg <= opts.tol * std::max(1.0, gsq)) {
            st.converged = true;
            break;
        }
        const double noise = 1e-12 * (0.5 * gsq + std::abs(0.5 * gsq - E));

        const double shift = std::max({lambda, k1sq, 1e-12});
        Field d = solve_shifted_laplacian(g, G, shift);
        const double radial = met.dot(d, u) / asq;
        for (int i = 0; i < g.n; ++i) d[i] -= radial * u[i];
        mask_blocked(d, u);
        double slope = met.dot(G, d);
        if (!(slope > 0)) {
            d = G;
            slope = pg * pg;
        }
        bool accepted = false;
        double progress = 0;
        for (; tau >= opts.step_min; tau *= 0.5) {
            Field trial = u;
            for (int i = 0; i < g.n; ++i) trial[i] -= tau * d[i];
            for (double& x : trial)
                if (x < 0) x = 0;
            const double ms = met.dot(trial, trial);
            if (!(ms > 0)) continue;
            const double s = std::sqrt(asq / ms);
            for (double& x : trial) x *= s;
            Field lap_t = radial_laplacian(g, trial);
            const double Et = value_of(trial, lap_t);
            if (Et <= E - 1e-4 * tau * slope) {
                progress = E - Et;
                u = std::move(trial);
                lap = std::move(lap_t);
                E = Et;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        if (progress <= noise) {
            if (++plateau >= 8) break;
        } else {
            plateau = 0;
        }
        tau = std::min(tau * 1.5, opts.step_max);
    }

    // public-quadrature certificates
    const double sp = std::sqrt(asq / inner(g, u, u));
    for (double& x : u) x *= sp;
    Field F = radial_laplacian(g, u);
    for (int i = 0; i < g.n; ++i) F[i] = -F[i] - alpha * u[i] * u[i];
    st.lambda = -inner(g, u, F) / asq;
    for (int i = 0; i < g.n; ++i) F[i] += st.lambda * u[i];
    mask_blocked(F, u);
    st.pg_norm = std::sqrt(inner(g, F, F));
    st.value = j0_functional(g, u, alpha);
    st.u = std::move(u);
    st.iterations = it;
    return st;
}

CollapseSweep mass_collapse_sweep(const SolitonW& w, double alpha,
                                  const std::vector<double>& eps_list, int n, double R_resc,
                                  const SolverOptions& opts) {
    if (eps_list.empty()) throw Error("mass collapse sweep: empty epsilon list");
    for (size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            throw Error("mass collapse sweep: epsilon list must be strictly descending");

    CollapseSweep sweep;
    sweep.vgrid = RadialGrid(n, R_resc);
    sweep.limit = limit_ground_state(sweep.vgrid, w, alpha, opts);

    RadialGrid sob_grid(2048, 40.0);
    const double c_sob = sobolev_constant(sob_grid);

    FieldTriple prev;
    double eps_prev = 0;
    for (double eps : eps_list) {
        Constants geo = geometry_constants({alpha, eps, eps}, w.l2, c_sob);
        RadialGrid ge(n, R_resc / (eps * eps));
        FieldTriple init;
        if (eps_prev > 0) {
            // warm start through the scaling map: commensurate grids make the
            // rescaled profiles coincide node by node, so this is exact
            const double f = std::pow(eps / eps_prev, 4);
            init = prev;
            for (Field* c : {&init.u1, &init.u2, &init.u3})
                for (double& x : *c) x *= f;
        }
        StationaryState st = ground_state(ge, w, geo, opts, eps_prev > 0 ? &init : nullptr);

        const double inv4 = 1.0 / std::pow(eps, 4);
        double dist_sq = 0;
        FieldTriple diff;
        const Field* mine[3] = {&st.u.u1, &st.u.u2, &st.u.u3};
        const Field* lim[3] = {&sweep.limit.u.u1, &sweep.limit.u.u2, &sweep.limit.u.u3};
        for (int c = 0; c < 3; ++c) {
            Field dcomp(n);
            for (int i = 0; i < n; ++i) dcomp[i] = inv4 * (*mine[c])[i] - (*lim[c])[i];
            Norms nd = norms(sweep.vgrid, dcomp);
            dist_sq += nd.mass + nd.grad_sq;
        }

        sweep.records.push_back({eps, st.energy, st.grad_sq, st.lambda1 + st.lambda2,
                                 std::sqrt(dist_sq)});
        prev = std::move(st.u);
        eps_prev = eps;
    }
    return sweep;
}

}  // namespace threewave
