#pragma once
// Fourier series of f1/f2 in the variable kL. Every Fourier mode turns the
// k-integral of the decaying kernel into a free propagator with a shifted
// source point (an "image"), so the decaying part of the evolved state is a
// sum of Fresnel integrals.

#include <complex>
#include <vector>

#include "escape/core_model.hpp"

namespace escape {

class KernelImages {
 public:
  // Doubles the FFT length until the aliased tail falls below rel_tol of
  // the coefficient sum, then truncates to the smallest window carrying
  // everything above that threshold.
  explicit KernelImages(const SystemParams& p, double rel_tol = 1e-15);

  const SystemParams& params() const { return p_; }
  int m_min() const { return m_min_; }
  int m_max() const { return m_max_; }
  cplx F1(int m) const { return F1_[m - m_min_]; }
  cplx F2(int m) const { return F2_[m - m_min_]; }
  // Sum of |F1| + |F2| over the discarded modes (bound on truncation).
  double dropped_mass() const { return dropped_; }
  double total_mass() const { return total_; }
  int fft_length() const { return n_fft_; }

  // f1/f2 resynthesised from the retained modes.
  cplx f1_series(double k) const;
  cplx f2_series(double k) const;

  // Decaying part of the evolved state at x in [0, L]:
  //   psi_dec(x, t) = int_0^L K1(x, y, t) psi0(y) dy.
  // err (optional) receives a bound on truncation plus rounding.
  cplx decaying_state(const InitialState& psi0, double x, double t, double* err = nullptr) const;

 private:
  SystemParams p_;
  int m_min_ = 0, m_max_ = 0, n_fft_ = 0;
  std::vector<cplx> F1_, F2_;
  double dropped_ = 0.0, total_ = 0.0;
};

}  // namespace escape
