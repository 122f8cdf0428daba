#pragma once
// Nonescape probability P(t) = int_0^L |psi(x, t)|^2 dx, its limit, the
// large-time coefficients, scaling laws and tail fits.

#include <memory>
#include <string>
#include <vector>

#include "escape/core_model.hpp"

namespace escape {

class KernelImages;

// How the decaying part of psi(x, t) is obtained.
//   ImageSum       - Fourier modes of f1/f2 in kL, each a closed-form Fresnel integral
//   Momentum       - k-quadrature on [-c, c] plus asymptotic tails, cutoff doubled
//   DoubleMomentum - the literal (k, p) double integral on [-c, c]^2 (validation only)
//   ExactKernel    - closed-form propagators at (1/2, pi/2) and (1/2, 0)
//   Auto           - ImageSum
enum class PMethod { Auto, ImageSum, Momentum, DoubleMomentum, ExactKernel };

std::string to_string(PMethod m);
PMethod parse_method(const std::string& s);

struct NonescapeOptions {
  PMethod method = PMethod::Auto;
  double rel_tol = 1e-7;   // on the decaying part of P
  double abs_tol = 1e-30;
  double cutoff = 0.0;     // momentum routes: starting cutoff, 0 = automatic
  int max_refinements = 8;
};

struct NonescapeValue {
  double p = 0.0;
  double error = 0.0;
  double p_infinity = 0.0;
  double p_decay = 0.0;  // P - P_infinity
  PMethod method = PMethod::ImageSum;
};

// Holds everything reusable across times for one (params, psi0) pair.
// Calls are const and may run concurrently.
class NonescapeSolver {
 public:
  NonescapeSolver(const SystemParams& p, const InitialState& psi0, NonescapeOptions opt = {});
  ~NonescapeSolver();

  NonescapeValue operator()(double t) const;

  const SystemParams& params() const { return p_; }
  const InitialState& state() const { return psi0_; }
  double p_infinity() const { return p_inf_; }
  PMethod method() const { return method_; }

 private:
  NonescapeValue by_images(double t) const;
  NonescapeValue by_momentum(double t) const;
  NonescapeValue by_double_momentum(double t) const;
  NonescapeValue by_exact_kernel(double t) const;
  NonescapeValue finish(double p_decay, double err) const;

  SystemParams p_;
  InitialState psi0_;
  NonescapeOptions opt_;
  PMethod method_;
  double p_inf_;
  std::shared_ptr<const KernelImages> images_;
};

NonescapeValue nonescape_probability(const SystemParams& p, const InitialState& psi0, double t,
                                     const NonescapeOptions& opt = {});

// Decaying part psi_dec(x, t) of the evolved state on the loop (x in [0, L]).
cplx decaying_state(const SystemParams& p, const InitialState& psi0, double x, double t);

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> errors;
  std::string method;  // "quadrature", "exact-kernel" or "pseudo-spectral"
};

// Logarithmic grid from t_min to t_max inclusive, per_decade points per decade.
std::vector<double> log_time_grid(double t_min, double t_max, int per_decade);

TimeSeries nonescape_series(const SystemParams& p, const InitialState& psi0, const std::vector<double>& times,
                            const NonescapeOptions& opt = {});

// Squared norm of the bound-subspace projection; closed form via the mirror
// symmetry about L/2.
double p_infinity(const SystemParams& p, const InitialState& psi0);
// Same quantity summed over the bound states one by one (projector route).
double p_infinity_projector(const SystemParams& p, const InitialState& psi0, int n_terms = 2000);

double c1_coefficient(const SystemParams& p, const InitialState& psi0);
// Throws DomainError when cos(Phi) = 1 and C1 != 0 (the leading power is 1).
double c3_coefficient(const SystemParams& p, const InitialState& psi0);

// Closed forms for psi0 = loop bound state n (n >= 1).
double c1_bound_state(const SystemParams& p, int n);
double c3_bound_state(const SystemParams& p, int n);

struct DecayReport {
  double p_infinity = 0.0;
  int delta = 0;           // 1 or 3; 0 when no power-law term was found
  double c_delta = 0.0;
  double c1 = 0.0;
  double c3 = 0.0;
  bool higher_order = false;  // both C1 and C3 vanish
  std::string note;
};

DecayReport decay_report(const SystemParams& p, const InitialState& psi0);

// Loop stretched by lambda: t -> lambda^2 t, C_k -> lambda^(2k) C_k.
TimeSeries rescale(const TimeSeries& s, double lambda);
DecayReport rescale(const DecayReport& r, double lambda);

struct PowerLawFit {
  double delta = 0.0;
  double c = 0.0;
  int points = 0;
  double rms_residual = 0.0;  // in log space
};

// Least squares on log(P - P_inf) against log t. With t_lo = t_hi = 0 the
// last decade of the series is used.
PowerLawFit power_law_fit(const TimeSeries& s, double p_inf, double t_lo = 0.0, double t_hi = 0.0);

}  // namespace escape
