#pragma once
// Constrained minimization engines for the three-wave energy on the dual mass
// sphere S(a1,a2): ground states by damped normalized gradient flow, excited
// states by descent on the fiber-reduced functional u -> E(sigma_u * u), the
// small-field limit problem at masses (1,1), the scalar J0 flow, and the
// mass-collapse sweep over a descending list of symmetric masses.

#include <utility>
#include <vector>

#include "threewave/functionals.hpp"
#include "threewave/reference.hpp"

namespace threewave {

struct SolverOptions {
    double tol = 1e-8;           // projected-gradient stop, relative to max(1, ||grad u||_2^2)
    double pohozaev_tol = 1e-6;  // |P| stop, relative to ||grad u||_2^2
    int max_iter = 20000;
    double step0 = 1.0;          // initial damped step for the preconditioned flow
    double step_min = 1e-13;     // Armijo backtracking floor
    double step_max = 1024.0;    // cap on step regrowth
    double dilate_tol = 1e-3;    // resampling guard for re-centering dilations
};

// A critical-point certificate.  The profile u realizes the state after the
// mass-preserving dilation by sigma: all scalar fields (energy, grad_sq,
// multipliers, pohozaev_residual, classification) refer to sigma * u.  Ground
// flows always return sigma = 1; the fiber-reduced flow returns sigma != 1
// when the dilated representative would concentrate below the grid scale, in
// which case the scalars are transported through the dilation in closed form.
struct StationaryState {
    FieldTriple u;
    double sigma = 1.0;
    double lambda1 = 0;  // multiplier of Q1; the third equation carries lambda1+lambda2
    double lambda2 = 0;
    double energy = 0;
    double grad_sq = 0;
    double pohozaev_residual = 0;
    PohozaevClass classification = PohozaevClass::plus;
    int iterations = 0;
    bool converged = false;
    double pg_norm = 0;           // final projected-gradient norm
    double residual_sup = 0;      // sup norm of the stationary-equation residual
    double symmetry_defect = 0;   // sup |u1-u2|, recorded (not asserted) when a1 = a2
    bool energy_window_ok = true; // excited flow: energy inside (m+, m+ + C_Sob^{3/2}/3)
};

// Residual of the stationary system at multipliers (lambda1, lambda2):
//   -Lap u1 + lambda1 u1 - u1^5 - alpha u3 u2
//   -Lap u2 + lambda2 u2 - u2^5 - alpha u3 u1
//   -Lap u3 + (lambda1+lambda2) u3 - u3^5 - alpha u1 u2
// Laplacians via the v = r u spectral route.  with_sextic drops the quintic
// terms (the small-field limit system).
FieldTriple energy_gradient(const RadialGrid& g, const FieldTriple& u, double alpha,
                            double lambda1, double lambda2, bool with_sextic = true);

// Multipliers making the flow direction tangent to both mass constraints:
//   [ ||u1||^2+||u3||^2    ||u3||^2        ] [lambda1]   [ <u1,F1>+<u3,F3> ]
//   [ ||u3||^2             ||u2||^2+||u3||^2] [lambda2] = -[ <u2,F2>+<u3,F3> ]
// where F is the multiplier-free part of the gradient.  Throws when a
// component is numerically zero (degenerate constraint).
std::pair<double, double> multiplier_solve(const RadialGrid& g, const FieldTriple& u,
                                           double alpha, bool with_sextic = true);

// Exact re-projection of a nonnegative triple onto the dual mass sphere
// S(a1, a2) by the closed-form two-parameter rescaling (u1, u2, u3) ->
// (sqrt(x) u1, sqrt(y) u2, (xy)^{1/4} u3).  Throws when no positive rescaling
// exists (a component with zero mass on the wrong side of the constraint).
void project_masses(const RadialGrid& g, FieldTriple& u, double a1sq, double a2sq);

// Ground state on S(a1,a2) inside the gradient ball B_rho0: preconditioned
// damped descent with exact two-parameter mass re-projection (theta3 =
// sqrt(theta1 theta2)) and nonnegativity clamping.  geo carries alpha, the
// masses and the landscape constants; requires max(a1,a2) < D.  The default
// initializer is the symmetric triple of single solitons at split masses
// (a1^2 - m3, a2^2 - m3, m3), m3 = min(a1^2,a2^2)/2.  Throws if an iterate
// leaves B_rho0 or the coupling cone M; returns converged = false with
// diagnostics when max_iter is exhausted.
StationaryState ground_state(const RadialGrid& g, const SolitonW& w, const Constants& geo,
                             const SolverOptions& opts = {},
                             const FieldTriple* init = nullptr);

// Minimizer of the limit energy (no sextic terms) at masses (1,1).
StationaryState limit_ground_state(const RadialGrid& g, const SolitonW& w, double alpha,
                                   const SolverOptions& opts = {});

// Excited state: minimizes the reduced functional F(z) = E(sigma_z * z) where
// sigma_z is the fiber maximum of z, via the chain rule on the three cached
// integrals (no per-step resampling).  The iterate re-centers to sigma = 1
// whenever that dilation is resolvable.  init defaults to the ground triple
// with u1 replaced by u1 + t Ubar_eps (t = 1, eps = 0.1), mass-renormalized.
// The converged energy is checked against the window
// (ground.energy, ground.energy + C_Sob^{3/2}/3); violation is reported via
// energy_window_ok = false, never thrown.
StationaryState excited_state(const RadialGrid& g, const SolitonW& w, const Constants& geo,
                              const StationaryState& ground, const SolverOptions& opts = {},
                              const FieldTriple* init = nullptr);

// Scalar flow for J0(u) = 1/2 ||grad u||^2 - alpha/3 int u^3 on S(a).
struct ScalarState {
    Field u;
    double lambda = 0;
    double value = 0;  // J0 at the final iterate
    int iterations = 0;
    bool converged = false;
    double pg_norm = 0;
};

ScalarState minimize_j0(const RadialGrid& g, const SolitonW& w, double alpha, double a,
                        const SolverOptions& opts = {});

struct CollapseRecord {
    double epsilon = 0;
    double energy = 0;
    double grad_sq = 0;
    double lambda_sum = 0;         // lambda1 + lambda2
    double rescaled_distance = 0;  // H1 distance of eps^{-4} u(eps^{-2} .) to the limit profile
};

struct CollapseSweep {
    std::vector<CollapseRecord> records;
    StationaryState limit;  // the masses-(1,1) limit minimizer on the rescaled grid
    RadialGrid vgrid;       // common grid carrying all rescaled profiles
};

// Ground states at a1 = a2 = eps for a descending list of eps, each warm
// started from the previous solution through the eps-scaling map.  The grid
// for eps has radius R_resc / eps^2, so every rescaled profile
// eps^{-4} u(eps^{-2} .) lives on the single grid (n, R_resc) by relabeling
// alone, and the H1 distances to the limit minimizer need no interpolation.
CollapseSweep mass_collapse_sweep(const SolitonW& w, double alpha,
                                  const std::vector<double>& eps_list, int n, double R_resc,
                                  const SolverOptions& opts = {});

}  // namespace threewave
