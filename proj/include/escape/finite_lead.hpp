#pragma once
// Loop plus a lead of finite length ell with a hard wall at L + ell, at
// Phi = 0 and eps = 4/9 (free vertex conditions). The eigenbasis of the free
// Hamiltonian comes from contraction-map fixed points; the interacting
// evolution uses Strang splitting with that basis for the kinetic factor.

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "escape/core_model.hpp"
#include "escape/nonescape.hpp"

namespace escape {

// How exp(-iV dt) acts between kinetic factors.
//   Grid     - pointwise on the grid, then projected back onto the basis. Loses
//              the part of the kicked state outside the basis span each step.
//   Galerkin - exp(-i dt V_nm) with V_nm = <phi_n|V|phi_m>; unitary on the span.
enum class KickMode { Grid, Galerkin };
std::string to_string(KickMode k);
KickMode parse_kick_mode(const std::string& s);

struct FiniteLeadConfig {
  double L = 1.0;
  double ell = 50.0;      // lead length; ell / L must be an integer > 1
  int n_modes = 400;
  double dx = 1.0 / 80.0; // L / dx must be an even integer
  double dt = 1e-3;
  double lambda = 0.0;    // soft-core potential strength
  double t_final = 25.0;
  int record_every = 10;  // steps between recorded P values
  double max_drift = 1e-3;
  KickMode kick = KickMode::Galerkin;

  // Scaled-down configuration that runs in minutes.
  static FiniteLeadConfig desk();
  // Full-size configuration (ell = 500 L, 2500 modes); needs about 0.8 GB
  // for the mode table and many hours of stepping.
  static FiniteLeadConfig full();

  // Throws DomainError naming every violated constraint.
  void validate() const;
  int ell_ratio() const;     // ell / L
  int grid_intervals() const;  // (L + ell) / dx
  int loop_intervals() const;  // L / dx
};

enum class Branch { Regular, SigmaLeft, SigmaCenter, SigmaRight };
std::string to_string(Branch b);

// n belongs to Sigma = {2 m ell / L : m >= 1}.
bool in_sigma(const FiniteLeadConfig& cfg, int n);
// Branches carried by index n: {Regular}, or {SigmaLeft, SigmaCenter, SigmaRight}.
std::vector<Branch> branches(const FiniteLeadConfig& cfg, int n);

struct FixedPoint {
  double delta = 0.0;
  Branch branch = Branch::Regular;
  std::vector<double> iterates;  // seed first, fixed point last
};

// Iterates delta -> (1/ell) atan(cot(theta/2) / 2), theta = n pi L / ell + delta L,
// from the seed of the branch until successive iterates agree to 1e-14.
FixedPoint fixed_point_delta(const FiniteLeadConfig& cfg, int n, Branch branch);

struct EigenMode {
  int n = 0;
  Branch branch = Branch::Regular;
  double k = 0.0;
  double delta = 0.0;
  double norm = 0.0;  // A_n; for the loop mode the sqrt(2/L) prefactor

  // Real representative of the mode (a global phase is dropped):
  //   [0, L)       2 A cos(k (x - L/2))
  //   [L, L + ell] A [2 cos(kL/2) cos(k (x - L)) - 4 sin(kL/2) sin(k (x - L))]
  double value(double x, double L) const;
  double derivative(double x, double L) const;
};

EigenMode eigenmode(const FiniteLeadConfig& cfg, int n, Branch branch);

// Closed-form normalization A_n of a lead-coupled mode.
double mode_normalization(double k, double L, double ell);

// Residual of 2 tan(k ell) = sin(kL) / (1 - cos(kL)), relative to 1 + |rhs|.
double transcendental_residual(double k, double L, double ell);

// Vertex and wall conditions: psi(0+) - psi(L-), psi(L-) - psi(L+),
// psi'(L-) - psi'(0+) - psi'(L+), psi(L + ell).
std::array<double, 4> lead_boundary_residuals(const EigenMode& m, const FiniteLeadConfig& cfg);

// lambda / sqrt(d^2 + 1e-4) with d the distance to a charge at x = L/2.
double soft_core_potential(const FiniteLeadConfig& cfg, double x);

// First n_modes eigenmodes sorted by k, tabulated on the grid x_j = j dx.
class LeadBasis {
 public:
  explicit LeadBasis(const FiniteLeadConfig& cfg);

  const FiniteLeadConfig& config() const { return cfg_; }
  const std::vector<EigenMode>& modes() const { return modes_; }
  const Eigen::MatrixXd& table() const { return table_; }  // n_modes x grid points
  const Eigen::VectorXd& weights() const { return w_; }    // Simpson on [0, L + ell]
  const Eigen::VectorXd& energies() const { return e_; }
  Eigen::VectorXd grid() const;

  // Generalized Fourier transform and its inverse.
  Eigen::VectorXcd project(const Eigen::VectorXcd& psi) const;
  Eigen::VectorXcd synthesize(const Eigen::VectorXcd& c) const;

  // Simpson Gram matrix of the first m modes.
  Eigen::MatrixXd gram(int m) const;
  // Kick operator on the basis span: F exp(-iV dt) F^-1 (Grid) or
  // exp(-i dt F V F^-1) (Galerkin).
  Eigen::MatrixXcd kick_matrix(const Eigen::VectorXd& potential, double dt, KickMode mode) const;

  double norm2(const Eigen::VectorXcd& psi) const;        // whole system
  double loop_norm2(const Eigen::VectorXcd& psi) const;   // [0, L]

 private:
  FiniteLeadConfig cfg_;
  std::vector<EigenMode> modes_;
  Eigen::MatrixXd table_;
  Eigen::VectorXd w_, w_loop_, e_;
};

struct EvolutionState {
  Eigen::VectorXcd psi;  // grid values
  double t = 0.0;
  double norm = 1.0;
};

// psi0 sampled on the grid (zero on the lead).
EvolutionState initial_state_on_grid(const LeadBasis& basis, const InitialState& psi0);

// One step exp(-iV dt/2) F^-1 exp(-iE dt) F exp(-iV dt/2) with a fixed
// potential table. Grid applies the half kicks pointwise; Galerkin applies
// them as exp(-i dt/2 V_nm) between projection and synthesis.
class StrangStepper {
 public:
  StrangStepper(const LeadBasis& basis, const Eigen::VectorXd& potential, double dt,
                KickMode mode = KickMode::Grid);
  // Throws ConvergenceError if the norm changes by more than max_step_drift.
  void step(EvolutionState& s, double max_step_drift = 1e-3) const;
  double dt() const { return dt_; }

 private:
  const LeadBasis& basis_;
  double dt_;
  KickMode mode_;
  Eigen::VectorXcd half_;
  Eigen::MatrixXcd half_nm_;
  Eigen::VectorXcd kinetic_;
};

Eigen::VectorXd potential_table(const LeadBasis& basis, double lambda);

// Single step with the soft-core potential of cfg.lambda and the kick of cfg.kick.
EvolutionState strang_step(const LeadBasis& basis, const EvolutionState& s);

struct EvolutionResult {
  TimeSeries series;  // P(t) on [0, L]; method "pseudo-spectral"
  std::vector<double> norms;
  double parseval_defect = 0.0;  // 1 - |P psi0|^2 of the initial projection
  double max_drift = 0.0;        // relative to the projected initial norm
  int steps = 0;
};

// Steps to t_final, recording every cfg.record_every steps (and t = 0).
// The error column holds the norm drift so far plus the Parseval defect.
// Between records the state stays in coefficient space: the closing half
// kick of one step and the opening half kick of the next merge into
// F exp(-iV dt) F^-1, so each step is one n_modes x n_modes product instead
// of two passes over the grid. The result equals repeated strang_step up to
// rounding and the Gram defect of the basis.
EvolutionResult evolve(const LeadBasis& basis, const InitialState& psi0, double t_final);
// Same with lambda overriding the configured potential strength, so one basis
// can serve several potentials.
EvolutionResult evolve(const LeadBasis& basis, const InitialState& psi0, double t_final, double lambda);
EvolutionResult evolve(const FiniteLeadConfig& cfg, const InitialState& psi0, double t_final);

}  // namespace escape
