#pragma once
// Uniform radial grid on (0,R) for fields on R^3 restricted to radial profiles.
// Nodes sit at r_i = (i+1)*dr, i = 0..n-1, dr = R/(n+1); the endpoints r=0 and
// r=R are excluded (regularity at the origin, decay at the wall).

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace threewave {

using Field = std::vector<double>;
using CField = std::vector<std::complex<double>>;

struct FieldTriple {
    Field u1, u2, u3;
};

struct CFieldTriple {
    CField psi1, psi2, psi3;
};

struct RadialGrid {
    int n = 0;       // interior node count
    double R = 0;    // wall radius
    double dr = 0;   // R/(n+1)
    std::vector<double> r;   // node radii
    // quadrature weights: integrate(f) = sum_i qw[i]*f[i] approximates
    // 4*pi*int_0^R f(r) r^2 dr.  Composite Simpson over the n+2 point closure
    // (with a 3/8 patch when the interval count is odd); the r=0 endpoint
    // carries zero weight through the r^2 factor and the r=R value is folded
    // in by cubic extrapolation from the last four nodes.
    std::vector<double> qw;

    RadialGrid() = default;
    RadialGrid(int n_, double R_);

    bool compatible(const RadialGrid& o) const {
        return n == o.n && R == o.R;
    }
};

// 4*pi*int_0^R f r^2 dr by the grid's quadrature weights.
double integrate_radial(const RadialGrid& g, const Field& f);
// same, plus a caller-supplied closed-form correction for 4*pi*int_R^inf f r^2 dr.
double integrate_radial(const RadialGrid& g, const Field& f, double tail);

// L2 pairing 4*pi*int f g r^2 dr.
double inner(const RadialGrid& g, const Field& f, const Field& h);

// d/dr by fourth-order finite differences.  One-sided stencils close both
// ends; with even_origin the two nodes nearest r=0 instead use ghost values
// f(-r) = f(r), which is the right closure for regular radial profiles.
Field radial_derivative(const RadialGrid& g, const Field& f, bool even_origin = false);
CField radial_derivative(const RadialGrid& g, const CField& f, bool even_origin = false);

struct Norms {
    double mass = 0;      // ||f||_2^2
    double grad_sq = 0;   // ||f'||_2^2 (3D radial gradient)
    double l6 = 0;        // ||f||_6^6
    double sup = 0;       // max |f|
    double tail_frac = 0; // mass fraction carried by r > 0.9 R
};

Norms norms(const RadialGrid& g, const Field& f);
Norms norms(const RadialGrid& g, const CField& f);

// cubic interpolation of a radial profile; even across r=0, zero beyond R.
double interp_profile(const RadialGrid& g, const Field& f, double x);

double sup_abs(const Field& f);
double sup_abs(const CField& f);

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace threewave
