#pragma once
// Time evolution of the three-wave system by Strang splitting on the radial
// reduction, with conservation monitors, the virial functional and its
// I'' = 8P check, gauge-orbit distance, and the three experiment drivers
// (orbital stability, dilation-induced blow-up, non-scattering).

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "threewave/functionals.hpp"
#include "threewave/grid.hpp"
#include "threewave/reference.hpp"
#include "threewave/solvers.hpp"

namespace threewave {

CFieldTriple complexify(const FieldTriple& u);

// one sampled monitor row; written to CSV in exactly this column order
struct EvolutionRecord {
    double t = 0;
    double energy = 0;
    double q1 = 0;
    double q2 = 0;
    double grad_sq = 0;
    double pohozaev_ = 0;
    double virial_ = 0;
    double dt = 0;
    double tail_mass = 0;  // mass fraction carried by r > 0.9 R
};

struct EvolutionControls {
    double dt0 = 1e-3;           // requested step; the integrator never exceeds it
    double dt_min = 1e-9;        // floor; reaching it raises the blow-up flag
    int output_stride = 10;      // record monitors every this many steps
    double stiff_budget = 0.05;  // bound on dt * (pointwise nonlinear rate)
    double substep_budget = 0.1;  // bound on substep * max|psi|^4 inside half-steps
    double tail_tol = 1e-3;      // wall-mass fraction beyond which records are untrusted
    bool linear_only = false;    // evolve by the free propagator alone
};

struct EvolutionState {
    double t = 0;
    CFieldTriple psi;
    double dt = 0;
    EvolutionRecord monitors;
};

struct Evolution {
    EvolutionState last;                  // final (or last valid) state
    std::vector<EvolutionRecord> series;  // per-stride monitor rows
    bool blew_up = false;                 // dt hit the floor
    double blowup_time = -1;              // time of the dt-floor event
    bool tail_warning = false;            // wall mass exceeded tail_tol at some record
    double substep_defect = 0;  // max pointwise mixed-moduli drift per nonlinear substep
};

using StrideCallback = std::function<void(const EvolutionState&)>;

// Strang splitting: half nonlinear substep, exact sine-space linear substep,
// half nonlinear substep.  The nonlinear half-steps integrate the pointwise
// ODE i psi1' = -|psi1|^4 psi1 - alpha psi3 conj(psi2) (and cyclically) by
// classical 4th-order stepping.  Non-finite values stop the run with the last
// valid state kept in `last`.
Evolution evolve(const RadialGrid& g, const CFieldTriple& psi0, double alpha, double T,
                 const EvolutionControls& c = {}, const StrideCallback& on_stride = {});

// I = sum_j 4 pi int r^4 |psi_j|^2 dr (the weighted second moment)
double virial(const RadialGrid& g, const CFieldTriple& psi);

// max over interior samples of |I''_FD - 8 P| / max(1, |8 P|), with I''_FD the
// second central difference of the recorded virial on the uniform stride.
// Throws when fewer than three samples are available.
double virial_check(const std::vector<EvolutionRecord>& series);

// min over (theta1, theta2) of the H^1 distance to the gauge orbit
// (e^{i theta1} u1, e^{i theta2} u2, e^{i (theta1+theta2)} u3): 64x64 phase
// scan plus Newton refinement.
double gauge_distance(const RadialGrid& g, const CFieldTriple& psi, const FieldTriple& u);

struct ExperimentReport {
    enum class Kind { stability, instability, scattering };
    Kind kind = Kind::stability;
    std::vector<EvolutionRecord> series;
    std::map<std::string, double> summary;
    bool verdict = false;
};

// Ground state perturbed by u1 *= 1 + delta cos(pi r / R), masses
// re-projected; evolves to T and tracks the gauge distance per stride.
// Verdict: sup distance <= 10 delta.
// summary: max_gauge_distance, delta, ground_energy.
ExperimentReport stability_experiment(const RadialGrid& g, const SolitonW& w,
                                      const Constants& geo, double delta, double T,
                                      const SolverOptions& sopts = {},
                                      const EvolutionControls& c = {});

// Evolves s * v for the excited state v; verdict: grad_sq amplification
// >= 1e3 with the dt floor reached, and the virial concave decreasing after
// the initial transient, with P < 0 throughout.
// summary: amplification, dt_floor_time, blowup_estimate, min_p, max_p.
ExperimentReport instability_experiment(const RadialGrid& g, const SolitonW& w,
                                        const Constants& geo, double s, double T,
                                        const SolverOptions& sopts = {},
                                        const EvolutionControls& c = {});

// Evolves the small-mass ground state and, separately, the free flow of the
// identical datum.  Verdict: the nonlinear ||psi(t)||_6 stays >= 0.5 of its
// initial value while the free flow's decays by >= 10x.
// summary: nonlinear_l6_min_ratio, free_l6_final_ratio, ground_energy.
ExperimentReport scattering_diagnostic(const RadialGrid& g, const SolitonW& w,
                                       const Constants& geo, double T,
                                       const SolverOptions& sopts = {},
                                       const EvolutionControls& c = {});

}  // namespace threewave
