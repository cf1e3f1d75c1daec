#pragma once
// Reference profiles anchoring the landscape constants: the cubic soliton W
// solving -Lap W + W = W^2 (computed by shooting on the radial ODE) and the
// Sobolev extremal bubble U_eps(r) = 3^{1/4} eps^{1/2} / (eps^2 + r^2)^{1/2}
// with -Lap U = U^5.

#include "threewave/grid.hpp"

namespace threewave {

struct SolitonW {
    RadialGrid grid;
    Field profile;    // W at the nodes
    Field dprofile;   // dW/dr carried along by the ODE integrator
    double b0 = 0;    // W(0)
    double mass = 0;     // ||W||_2^2
    double grad_sq = 0;  // ||grad W||_2^2
    double cubic = 0;    // int W^3
    double l2 = 0;       // ||W||_2
    double r_patch = 0;  // radius beyond which the exponential tail model holds
    double tail_amp = 0; // W ~ tail_amp e^{-r}/r past r_patch
};

// shooting with bisection on W(0) in [1, 20]; overshoots cross zero,
// undershoots fall back toward the well at W = 1.
SolitonW solve_W(int n = 4096, double R = 30.0);

// evaluate W at any radius (grid interpolation, exponential tail beyond)
double soliton_value(const SolitonW& w, double rho);

// Sobolev quotient ||grad U_eps||_2^2 / ||U_eps||_6^2 assembled from grid
// quadrature plus closed-form power-law tail corrections beyond R.
double sobolev_constant(const RadialGrid& g, double eps = 1.0);

// bubble cut off by chi (1 on r <= 1, cosine ramp down to 0 at r = 2)
struct Bubble {
    Field profile;
    Field dprofile;  // exact derivative samples of the cutoff profile
    double eps = 0;
    double grad_sq = 0;
    double l6 = 0;    // ||.||_6^6
    double mass = 0;
};

Bubble cutoff_bubble(const RadialGrid& g, double eps);

// scalar single-component problem -Lap u + lambda u = alpha u^2 at mass a:
// u = (lambda/alpha) W(sqrt(lambda) r) with lambda = alpha^4 a^4 / ||W||_2^4
struct Soliton {
    Field profile;
    double lambda = 0;
};

Soliton single_soliton(const RadialGrid& g, const SolitonW& w, double alpha, double a,
                       double tail_tol = 1e-6);

// J0(u) = 1/2 ||grad u||^2 - alpha/3 int u^3
double j0_functional(const RadialGrid& g, const Field& u, double alpha);

// minimum of J0 at mass a: -alpha^4 a^6 / (6 ||W||_2^4)
double m0_single(const SolitonW& w, double alpha, double a);

}  // namespace threewave
