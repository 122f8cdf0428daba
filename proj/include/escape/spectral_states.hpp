#pragma once
// Generalized eigenstates phi_k of the loop+lead Hamiltonian, the weights
// f1/f2 of the decaying kernel, and the bound states in the continuum.

#include <complex>

#include "escape/core_model.hpp"

namespace escape {

struct SpectralCoefficients {
  double k = 0.0;
  cplx A, B, C, D;
  double den = 0.0;
};

// D(k) = a^2 sin^2(kL) + b^2 (cos kL - cos Phi)^2 in a cancellation-free
// product form; analytic in k, so complex arguments are accepted.
cplx den_bracket(const SystemParams& p, cplx k);
double den(const SystemParams& p, double k);

SpectralCoefficients scattering_coefficients(const SystemParams& p, double k);

// Eigenfunction value; loop branch on [0, L), lead branch on [L, inf).
cplx eigenfunction(const SystemParams& p, const SpectralCoefficients& c, double x);
cplx eigenfunction_derivative(const SystemParams& p, const SpectralCoefficients& c, double x);

double f1(const SystemParams& p, double k);
cplx f1(const SystemParams& p, cplx k);
cplx f2(const SystemParams& p, double k);
cplx f2(const SystemParams& p, cplx k);

// Distance from the real k axis to the nearest pole of f1/f2 (infinity if
// there is none). Sets the analyticity strip used by quadrature and by the
// Fourier-series expansion of f1/f2 in kL.
double pole_distance(const SystemParams& p);

enum class Parity { Plus, Minus };  // cos Phi = 1 / cos Phi = -1

struct FluxBoundState {
  int n;
  Parity parity;
  double L;
  double phi;
  double k() const;  // 2 n pi / L or (2n+1) pi / L
};

// Bound state matching the flux class of p; throws for generic flux or a
// non-positive index in the plus family.
FluxBoundState flux_bound_state(const SystemParams& p, int n);
cplx flux_bound_state_eval(const FluxBoundState& s, double x);

// <phi_k | psi0> for the scattering state at momentum k (any sign).
cplx scattering_overlap(const SystemParams& p, const InitialState& psi0, double k);

// Truncated eigen-expansion of psi0 evaluated at x: scattering integral over
// (0, k_max] by Gauss-Legendre panels split at kL = n pi, plus the bound
// states whose momentum does not exceed k_max.
cplx reconstruct_state(const SystemParams& p, const InitialState& psi0, double x, double k_max,
                       int n_quad = 16);

}  // namespace escape
