#pragma once
// Loop of circumference L threaded by flux Phi, attached at one vertex to a
// half-line lead. Units: hbar = e = c = 1, m = 1/2, so E = k^2.

#include <array>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "escape/errors.hpp"

namespace escape {

using cplx = std::complex<double>;
using namespace std::complex_literals;

inline constexpr double kPi = 3.14159265358979323846;

struct Coupling {
  double a;
  double b;
};

// a = (sqrt(1-2eps)-1)/2, b = (sqrt(1-2eps)+1)/2; eps must lie in (0, 1/2].
Coupling coupling_constants(double epsilon);

// Which regularized branch of the spectral formulas applies.
enum class FluxClass { Periodic, AntiPeriodic, Generic };  // cos Phi = 1, -1, other

inline constexpr double kFluxDispatchTol = 1e-12;

class SystemParams {
 public:
  SystemParams(double L, double phi, double epsilon);

  double L() const { return L_; }
  double phi() const { return phi_; }
  double epsilon() const { return eps_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double cos_phi() const { return cos_phi_; }
  double sin_phi() const { return sin_phi_; }
  FluxClass flux_class() const { return cls_; }

  // Same physics with the loop stretched by lambda.
  SystemParams scaled(double lambda) const { return {L_ * lambda, phi_, eps_}; }
  SystemParams with_phi(double phi) const { return {L_, phi, eps_}; }

 private:
  double L_, phi_, eps_, a_, b_, cos_phi_, sin_phi_;
  FluxClass cls_;
};

using Matrix3c = std::array<std::array<cplx, 3>, 3>;

// Vertex scattering matrix; real, symmetric and orthogonal.
Matrix3c scattering_matrix(double epsilon);

struct BoundaryResiduals {
  cplx r1, r2, r3;
  double max_abs() const;
};

BoundaryResiduals boundary_residuals(const SystemParams& p, cplx psi0p, cplx psiLm, cplx psiLp,
                                     cplx dpsi0p, cplx dpsiLm, cplx dpsiLp);

// Loop-supported initial wavefunction.
//
// The analytic variants are stored as finite exponential sums
//   psi(y) = sum_j c_j exp(i q_j y),   0 <= y <= L,
// which turns every moment and chirp integral into closed form. The sampled
// variant is a complex natural cubic spline with zero endpoint values.
class InitialState {
 public:
  enum class Kind { LoopBound, SinSquared, Superposition, Sampled };

  struct ExpTerm {
    cplx c;
    double q;
  };

  static InitialState loop_bound(int n, double L);
  static InitialState sin_squared(double L);
  // Weights are renormalized when their squared sum is off by more than 1e-12.
  static InitialState superposition(const std::vector<std::pair<cplx, int>>& terms, double L);
  // values[j] at y_j = j*L/(N-1); endpoint values are replaced by zero.
  static InitialState sampled(std::vector<cplx> values, double L);

  // psi(y) * exp(2 pi i m y / L): the partner state for a flux shift by 2 pi m.
  // The kernels pick up exp(2 pi i m (x - y) / L) under Phi -> Phi + 2 pi m,
  // so the positive sign is the one that cancels the y factor.
  InitialState with_winding(int m) const;

  Kind kind() const { return kind_; }
  double L() const { return L_; }
  std::string describe() const;

  // Zero outside [0, L].
  cplx operator()(double x) const;
  cplx derivative(double x) const;

  // int_0^L y^power exp(i kappa y) psi(y) dy for complex kappa.
  cplx moment(cplx kappa, int power = 0) const;

  // int_0^L psi(y) exp(i q y) exp(i alpha (y - y0)^2) dy, alpha > 0.
  cplx chirp_integral(double q, double alpha, double y0) const;

  // Empty for sampled states.
  const std::vector<ExpTerm>& exp_terms() const { return terms_; }

  // Mirror parity about L/2: +1 even, -1 odd, 0 neither (tolerance 1e-12).
  int mirror_parity() const;

 private:
  InitialState() = default;

  struct Spline {
    double h = 0.0;
    std::vector<cplx> y;    // nodal values
    std::vector<cplx> m;    // second derivatives
  };

  cplx spline_value(double x) const;
  cplx spline_derivative(double x) const;
  template <class F>
  cplx spline_integrate(F&& weight) const;

  Kind kind_ = Kind::LoopBound;
  double L_ = 1.0;
  std::string label_;
  std::vector<ExpTerm> terms_;
  Spline spline_;
};

// psi~^(n)(k) = (-i)^n / sqrt(2 pi) int_0^L exp(-i k y) y^n psi(y) dy
cplx fourier_moment(const InitialState& s, double k, int n);

// int_0^L y^p exp(i beta y) dy, complex beta, computed without cancellation.
cplx power_exp_integral(cplx beta, int p, double L);

// Parses "pi/2", "2pi", "-3*pi", "0.25" etc. Throws DomainError on garbage.
double parse_flux(const std::string& text);

}  // namespace escape
