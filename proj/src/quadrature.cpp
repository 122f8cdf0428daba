#include "escape/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include "escape/errors.hpp"

namespace escape {
using namespace std::complex_literals;

GaussLegendre::GaussLegendre(int n) {
  if (n < 1) throw DomainError("Gauss-Legendre rule needs n >= 1");
  // boost returns the non-negative zeros in increasing order
  const auto zeros = boost::math::legendre_p_zeros<double>(n);
  auto push = [this, n](double x) {
    // one Newton polish step, then the standard weight formula
    double d = boost::math::legendre_p_prime(n, x);
    x -= boost::math::legendre_p(n, x) / d;
    d = boost::math::legendre_p_prime(n, x);
    x_.push_back(x);
    w_.push_back(2.0 / ((1.0 - x * x) * d * d));
  };
  for (auto it = zeros.rbegin(); it != zeros.rend(); ++it)
    if (*it > 0.0) push(-*it);
  for (double z : zeros) push(z);  // a zero node (odd n) is listed once
}

const GaussLegendre& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussLegendre>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendre>(n);
  return *slot;
}

std::vector<double> simpson_weights(std::size_t n, double h) {
  if (n < 3 || n % 2 == 0) throw DomainError("composite Simpson needs an odd number (>= 3) of points");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  for (auto& v : w) v *= h / 3.0;
  return w;
}

cplx adaptive_integrate(const std::function<cplx(double)>& f, double a, double b, double tol, double* error,
                        int max_depth) {
  double err = 0.0;
  const cplx r = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(
      f, a, b, static_cast<unsigned>(max_depth), tol, &err);
  if (error) *error = err;
  return r;
}

// ---------------------------------------------------------------------------
// Fresnel primitive

namespace {

const double kSqrtPi = std::sqrt(3.14159265358979323846);
const cplx kEighthTurn = std::polar(1.0, 3.14159265358979323846 / 4.0);  // sqrt(i)

// int_0^u exp(i v^2) dv by its Maclaurin series; fine for |u| <= 2.5.
cplx fresnel_series(double u) {
  const double u2 = u * u;
  cplx term = u;  // i^n u^(2n+1) / n!
  cplx sum = 0.0;
  for (int n = 0; n < 200; ++n) {
    const cplx add = term / double(2 * n + 1);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    term *= 1i * u2 / double(n + 1);
  }
  return sum;
}

// Faddeeva w(z) for z = e^{i pi/4} u, u >= 2.5, via the Laplace continued
// fraction evaluated with the modified Lentz algorithm.
cplx faddeeva_cf(cplx z) {
  const double tiny = 1e-300;
  cplx f = z, C = z, D = 0.0;
  for (int n = 1; n < 5000; ++n) {
    const double an = -0.5 * n;
    D = z + an * D;
    if (D == 0.0) D = tiny;
    C = z + an / C;
    if (C == 0.0) C = tiny;
    D = 1.0 / D;
    const cplx delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) return 1i / (kSqrtPi * f);
  }
  throw ConvergenceError("Faddeeva continued fraction did not converge", {{"|z|", std::abs(z)}});
}

const cplx kG0 = 0.5 * kSqrtPi * kEighthTurn;  // G(0)

cplx tail_nonneg(double u) {
  if (u <= 2.5) return kG0 - fresnel_series(u);
  return 0.5 * kSqrtPi * kEighthTurn * std::exp(1i * (u * u)) * faddeeva_cf(kEighthTurn * u);
}

}  // namespace

cplx fresnel_tail(double u) {
  if (u >= 0.0) return tail_nonneg(u);
  return 2.0 * kG0 - tail_nonneg(-u);
}

cplx fresnel_segment(double u1, double u2) {
  if (u1 == u2) return 0.0;
  if (u1 > u2) return -fresnel_segment(u2, u1);
  // short in phase: direct quadrature is both exact enough and cancellation-free
  if (std::abs(u2 * u2 - u1 * u1) < 1.0 && (u2 - u1) < 1.0) {
    const auto& gl = gauss_legendre(20);
    return gl.integrate([](double v) { return std::exp(1i * (v * v)); }, u1, u2);
  }
  if (u1 >= 0.0) return tail_nonneg(u1) - tail_nonneg(u2);
  if (u2 <= 0.0) return tail_nonneg(-u2) - tail_nonneg(-u1);
  // straddles zero: both halves measured from the origin
  const cplx left = (-u1 <= 2.5) ? fresnel_series(-u1) : kG0 - tail_nonneg(-u1);
  const cplx right = (u2 <= 2.5) ? fresnel_series(u2) : kG0 - tail_nonneg(u2);
  return left + right;
}

std::vector<cplx> taylor_coefficients(const std::function<cplx(cplx)>& f, cplx z0, double r, int order,
                                      int samples) {
  if (samples <= order) samples = 2 * (order + 1);
  std::vector<cplx> vals(samples);
  for (int m = 0; m < samples; ++m) vals[m] = f(z0 + std::polar(r, 2.0 * 3.14159265358979323846 * m / samples));
  std::vector<cplx> out(order + 1);
  for (int j = 0; j <= order; ++j) {
    cplx s = 0.0;
    for (int m = 0; m < samples; ++m)
      s += vals[m] * std::polar(1.0, -2.0 * 3.14159265358979323846 * double(j) * m / samples);
    out[j] = s / (double(samples) * std::pow(r, j));
  }
  return out;
}

}  // namespace escape
