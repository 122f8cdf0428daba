#pragma once
// Time-evolution kernel K(x, y, t) = K1 + [cos Phi = 1] K2 + [cos Phi = -1] K3.

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "escape/core_model.hpp"

namespace escape {

struct KernelRequest {
  double x = 0.0;
  double y = 0.0;
  double t = 1.0;
  double cutoff = 0.0;  // starting cutoff for K1; 0 selects the automatic schedule
  int n_terms = 500;    // bilateral truncation of K2/K3
};

struct KernelValue {
  cplx value;
  double error = 0.0;
  double cutoff = 0.0;     // final K1 cutoff (K1 only)
  bool convergent = true;  // false for pointwise K2/K3 at t > 0
};

struct K1Options {
  double rel_tol = 1e-9;
  double abs_tol = 1e-13;
  int max_doublings = 8;
};

// Integral over the real k axis of g(k) exp(-i (k^2 t - k z)), split into
// Gauss-Legendre panels on [-c, c] and two asymptotic tails obtained by
// repeated integration by parts. g must be analytic in a strip around the
// real axis (needed for the Cauchy-integral Taylor coefficients at +-c).
class ChirpIntegrator {
 public:
  using Amplitude = std::function<cplx(cplx)>;

  // zmax bounds |z| for all later evaluations; strip is the analyticity
  // half-width of the amplitudes; period is the resonant spacing pi/L.
  ChirpIntegrator(double t, double cutoff, double zmax, double strip, double period);

  double cutoff() const { return c_; }
  const std::vector<double>& nodes() const { return k_; }
  const std::vector<double>& weights() const { return w_; }

  struct Tail {
    std::vector<cplx> right;  // Taylor coefficients of g at +c
    std::vector<cplx> left;   // Taylor coefficients of g(-u) at u = c
  };
  Tail tail_data(const Amplitude& g) const;

  // Value of the integral given amplitudes sampled at nodes() and tail data.
  // err receives the size of the last retained tail term.
  cplx integrate(const std::vector<cplx>& g_nodes, const Tail& tail, double z, double* err) const;

  static int tail_order() { return 10; }

 private:
  cplx tail_integral(const std::vector<cplx>& taylor, double z, double* err) const;

  double t_, c_, radius_;
  std::vector<double> k_, w_;
};

// Smallest cutoff for which the tail expansion is asymptotically useful.
double minimal_chirp_cutoff(double t, double zmax, double strip, double L);

KernelValue k1_kernel(const SystemParams& p, const KernelRequest& req, const K1Options& opt = {});

// Evaluates K1 for many (x, y) at one t, reusing the k-grid and amplitudes.
class K1Evaluator {
 public:
  K1Evaluator(const SystemParams& p, double t, const K1Options& opt = {}, double start_cutoff = 0.0);
  ~K1Evaluator();
  K1Evaluator(const K1Evaluator&) = delete;
  K1Evaluator& operator=(const K1Evaluator&) = delete;
  KernelValue operator()(double x, double y) const;

 private:
  struct Level;
  const Level& level(int i) const;
  SystemParams p_;
  double t_;
  K1Options opt_;
  double c0_;
  mutable std::vector<std::unique_ptr<Level>> levels_;
};

// At t = 0 these are the bound-subspace projectors and converge; at t > 0
// the pointwise sums only converge distributionally and are flagged.
KernelValue k2_kernel(const SystemParams& p, const KernelRequest& req);
KernelValue k3_kernel(const SystemParams& p, const KernelRequest& req);

// int_0^L K2 or K3 (x, y, t) psi0(y) dy: the bound part of the evolved state.
cplx bound_part(const SystemParams& p, const InitialState& psi0, double x, double t, int n_terms = 500);

struct ExactKernel {
  cplx continuum;         // K1 in closed form
  cplx bound;             // truncated K2 (zero when absent)
  bool bound_convergent;  // false when a pointwise K2 at t > 0 was summed
  cplx total() const { return continuum + bound; }
};

// Closed forms available at (eps, Phi) = (1/2, pi/2) and (1/2, 0).
bool has_exact_kernel(const SystemParams& p);
ExactKernel exact_kernel(const SystemParams& p, double x, double y, double t, int n_terms = 500);

// int k^n exp(-a k^2 + b k) dk over the real line; Re a >= 0, a != 0.
cplx gaussian_moment(int n, cplx a, cplx b);

enum class AsymptoticOrder { Leading, Next };

// Large-t expansion of K1 (K2/K3 excluded). For cos Phi = 1 the terms are
// t^-1/2 and t^-3/2; otherwise only t^-3/2 is present.
cplx kernel_asymptotic(const SystemParams& p, double x, double y, double t, AsymptoticOrder order);

// Same two orders obtained from the Maclaurin coefficients of f1, f2 at
// k = 0 rather than from the specialised closed forms.
cplx kernel_asymptotic_general(const SystemParams& p, double x, double y, double t);

}  // namespace escape
