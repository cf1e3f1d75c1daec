#pragma once
// Discrete sine transform (DST-I) pair on the interior nodes, plus the
// spectral radial operators built on it.  Radial profiles are lifted to
// v = r*u, which turns the 3D radial Laplacian into d^2/dr^2 with Dirichlet
// ends; sine modes sin(k pi r / R) then diagonalize it with eigenvalues
// -(k pi / R)^2.

#include "threewave/grid.hpp"

namespace threewave {

// forward: c_k = 2/(n+1) * sum_j v_j sin(pi j k/(n+1)); the mode-k basis
// vector maps to the k-th unit coefficient.
Field sine_transform(const RadialGrid& g, const Field& v);
// inverse: v_j = sum_k c_k sin(pi j k/(n+1))
Field sine_transform_inverse(const RadialGrid& g, const Field& c);

// Laplacian of a radial profile u via the v = r*u spectral route.
Field radial_laplacian(const RadialGrid& g, const Field& u);

// (shift - Laplacian)^{-1} u, diagonal in sine space; shift > 0.
Field solve_shifted_laplacian(const RadialGrid& g, const Field& u, double shift);

// exact free Schrodinger step psi -> exp(i dt Laplacian) psi applied
// componentwise in sine space (dt may be negative).
void free_propagate(const RadialGrid& g, CField& psi, double dt);

}  // namespace threewave
