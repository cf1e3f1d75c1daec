#pragma once
// Conserved functionals, the mixed-mass constraint pair, the Pohozaev
// functional, the L2-preserving dilation fiber and the h-geometry constants
// for the three-wave system
//   i dpsi1/dt = -Lap psi1 - |psi1|^4 psi1 - alpha psi3 conj(psi2)
//   i dpsi2/dt = -Lap psi2 - |psi2|^4 psi2 - alpha psi3 conj(psi1)
//   i dpsi3/dt = -Lap psi3 - |psi3|^4 psi3 - alpha psi1 psi2

#include "threewave/grid.hpp"

namespace threewave {

struct PhysParams {
    double alpha = 1.0;  // three-wave coupling, > 0
    double a1 = 0;       // sqrt of mass constraint Q1
    double a2 = 0;       // sqrt of mass constraint Q2

    friend bool operator==(const PhysParams&, const PhysParams&) = default;
};

struct Masses {
    double q1 = 0;  // ||psi1||_2^2 + ||psi3||_2^2
    double q2 = 0;  // ||psi2||_2^2 + ||psi3||_2^2
};

Masses masses(const RadialGrid& g, const FieldTriple& u);
Masses masses(const RadialGrid& g, const CFieldTriple& psi);

// Re int psi1 psi2 conj(psi3)
double coupling(const RadialGrid& g, const FieldTriple& u);
double coupling(const RadialGrid& g, const CFieldTriple& psi);

// strict positivity of the coupling integral
bool in_M(const RadialGrid& g, const FieldTriple& u);
bool in_M(const RadialGrid& g, const CFieldTriple& psi);

// E = sum_j (1/2 ||grad psi_j||^2 - 1/6 ||psi_j||_6^6) - alpha Re int psi1 psi2 conj(psi3)
double energy(const RadialGrid& g, const FieldTriple& u, double alpha);
double energy(const RadialGrid& g, const CFieldTriple& psi, double alpha);

// small-field limit functional: the sextic terms dropped
double energy_limit(const RadialGrid& g, const FieldTriple& u, double alpha);

// P = sum grad^2 - sum l6 - (3/2) alpha Re int psi1 psi2 conj(psi3)
double pohozaev(const RadialGrid& g, const FieldTriple& u, double alpha);
double pohozaev(const RadialGrid& g, const CFieldTriple& psi, double alpha);

// mass-preserving dilation s * u = s^{3/2} u(s r), resampled on the grid.
// Throws when the rescaled profile no longer fits the grid (mass drift or
// boundary tail beyond tolerance).
Field dilate(const RadialGrid& g, const Field& u, double s, double tol = 1e-5);
FieldTriple dilate(const RadialGrid& g, const FieldTriple& u, double s, double tol = 1e-5);

// cached integrals behind the dilation fiber Psi_u(s) = E(s * u):
//   Psi(s) = s^2/2 G - s^6/6 S - s^{3/2} alpha C
struct FiberCoefficients {
    double grad_sq = 0;   // G
    double sextic = 0;    // S
    double coupling_ = 0; // C
};

FiberCoefficients fiber_coefficients(const RadialGrid& g, const FieldTriple& u);

double fiber_value(const FiberCoefficients& c, double alpha, double s);
double fiber_d1(const FiberCoefficients& c, double alpha, double s);
double fiber_d2(const FiberCoefficients& c, double alpha, double s);

// landscape of the fiber for a state in the constraint set with positive
// coupling: local minimum below zero, then a zero, a positive local maximum,
// and a final zero, in that order.
struct FiberAnalysis {
    double s_min = 0;    // local minimum of Psi
    double s_max = 0;    // local maximum of Psi
    double zero_lo = 0;  // first zero of Psi
    double zero_hi = 0;  // second zero of Psi
    double psi_min = 0;  // Psi(s_min)
    double psi_max = 0;  // Psi(s_max)
};

FiberAnalysis fiber_critical_points(const FiberCoefficients& c, double alpha);

enum class PohozaevClass { plus, minus };

// split of the P = 0 set by the sign of the second fiber derivative at s = 1
PohozaevClass classify_pohozaev(const FiberCoefficients& c, double alpha);

// derived geometry of the energy landscape.  Needs the reference constants
// ||W||_2 (soliton mass) and the Sobolev constant.
struct Constants {
    double alpha = 0, a1 = 0, a2 = 0;
    double w_l2 = 0;     // ||W||_2
    double c_sob = 0;    // Sobolev constant
    double c_gn = 0;     // cubic Gagliardo-Nirenberg constant (2/||W||_2)^{1/3}
    double D = 0;        // subcritical mass threshold
    double D0 = 0;       // cruder threshold, D < D0
    double A1 = 0;       // sextic coefficient of h
    double A2 = 0;       // coupling coefficient of h
    double rho0 = 0;     // argmax-scale (18 A1)^{-1/4}
    double rho_bar = 0;  // (54 A1)^{-1/4}
    double h_at_rho0 = 0;
    double R0 = 0;       // inner root of h (when h_at_rho0 > 0)
    double R1 = 0;       // outer root of h
};

// h(rho) = rho^2/2 - A1 rho^6 - A2 rho^{3/2}
double h_value(const Constants& c, double rho);

Constants geometry_constants(const PhysParams& p, double w_l2, double c_sob);

// phase symmetry (theta1, theta2, theta1 + theta2)
CFieldTriple gauge_apply(const CFieldTriple& psi, double th1, double th2);

}  // namespace threewave
