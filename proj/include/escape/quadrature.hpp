#pragma once
// Quadrature and special-function primitives shared by the physics modules.

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace escape {

using cplx = std::complex<double>;

class GaussLegendre {
 public:
  explicit GaussLegendre(int n);

  int size() const { return static_cast<int>(x_.size()); }
  const std::vector<double>& nodes() const { return x_; }    // on [-1, 1]
  const std::vector<double>& weights() const { return w_; }

  template <class F>
  auto integrate(F&& f, double a, double b) const {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    decltype(f(c)) sum{};
    for (std::size_t i = 0; i < x_.size(); ++i) sum += w_[i] * f(c + h * x_[i]);
    return sum * h;
  }

 private:
  std::vector<double> x_, w_;
};

// Cached rule; the reference stays valid for the program lifetime.
const GaussLegendre& gauss_legendre(int n);

// Composite Simpson weights for n (odd) equally spaced points with step h.
std::vector<double> simpson_weights(std::size_t n, double h);

// Adaptive Gauss-Kronrod (21 point) for complex integrands on [a, b].
cplx adaptive_integrate(const std::function<cplx(double)>& f, double a, double b, double tol,
                        double* error = nullptr, int max_depth = 30);

// G(u) = int_u^inf exp(i v^2) dv
cplx fresnel_tail(double u);
// int_{u1}^{u2} exp(i v^2) dv, evaluated so that far-out segments do not
// lose digits to cancellation between two tails.
cplx fresnel_segment(double u1, double u2);

// Taylor coefficients f^(j)(z0)/j!, j = 0..order, of a function analytic in
// the disc |z - z0| <= r, from the trapezoid rule on the circle.
std::vector<cplx> taylor_coefficients(const std::function<cplx(cplx)>& f, cplx z0, double r, int order,
                                      int samples = 64);

// Compensated (Neumaier) summation of a term sequence.
class KahanSum {
 public:
  void add(cplx v) {
    re_.add(v.real());
    im_.add(v.imag());
  }
  cplx value() const { return {re_.value(), im_.value()}; }

 private:
  struct Real {
    double s = 0.0, c = 0.0;
    void add(double v) {
      const double t = s + v;
      c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
      s = t;
    }
    double value() const { return s + c; }
  };
  Real re_, im_;
};

}  // namespace escape
