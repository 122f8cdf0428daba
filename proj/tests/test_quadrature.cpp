#include <doctest.h>

#include <boost/math/special_functions/factorials.hpp>

#include "escape/quadrature.hpp"
#include "oracles.hpp"

using namespace escape;
using namespace std::complex_literals;

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
  for (int n : {1, 2, 5, 12, 20, 40}) {
    const auto& g = gauss_legendre(n);
    CHECK(g.size() == n);
    for (int d = 0; d <= 2 * n - 1; ++d) {
      const double got = g.integrate([&](double x) { return std::pow(x, d); }, 0.0, 2.0);
      const double want = std::pow(2.0, d + 1) / (d + 1);
      CHECK(std::abs(got - want) <= 1e-13 * want);
    }
  }
}

TEST_CASE("Gauss-Legendre weights sum to 2 and nodes are symmetric") {
  const auto& g = gauss_legendre(31);
  double s = 0.0;
  for (double w : g.weights()) s += w;
  CHECK(std::abs(s - 2.0) < 1e-14);
  for (int i = 0; i < g.size(); ++i) CHECK(std::abs(g.nodes()[i] + g.nodes()[g.size() - 1 - i]) < 1e-15);
}

TEST_CASE("Simpson weights") {
  const auto w = simpson_weights(5, 0.5);
  REQUIRE(w.size() == 5);
  const double want[] = {1.0 / 6, 4.0 / 6, 2.0 / 6, 4.0 / 6, 1.0 / 6};
  for (int i = 0; i < 5; ++i) CHECK(std::abs(w[i] - want[i]) < 1e-15);
  // exact for cubics
  const auto v = simpson_weights(101, 0.01);
  double s = 0.0;
  for (int i = 0; i <= 100; ++i) s += v[i] * std::pow(0.01 * i, 3);
  CHECK(std::abs(s - 0.25) < 1e-14);
  CHECK_THROWS(simpson_weights(4, 0.1));
}

TEST_CASE("adaptive integration of oscillatory and peaked integrands") {
  double err = 0.0;
  const cplx a = adaptive_integrate([](double x) { return std::exp(1i * 40.0 * x); }, 0.0, 1.0, 1e-12, &err);
  CHECK(std::abs(a - (std::exp(40i) - 1.0) / 40i) < 1e-12);
  CHECK(err < 1e-10);
  const cplx b = adaptive_integrate([](double x) { return cplx(1.0 / (1e-4 + x * x)); }, -1.0, 1.0, 1e-12);
  CHECK(std::abs(b.real() - 2.0 * std::atan(100.0) / 1e-2) < 1e-8);
}

TEST_CASE("Fresnel tail at the origin and against quadrature") {
  const cplx half = std::sqrt(oracle::pi) / 2.0 * std::exp(1i * oracle::pi / 4.0);
  CHECK(std::abs(fresnel_tail(0.0) - half) < 1e-14);
  // G(-u) = 2 G(0) - G(u)
  for (double u : {0.3, 2.0, 9.0}) CHECK(std::abs(fresnel_tail(-u) - (2.0 * half - fresnel_tail(u))) < 1e-13);
  for (double u : {0.1, 1.0, 3.5, 12.0}) {
    // substitute v^2 = s: int_u^inf exp(i v^2) dv = int_{u^2}^inf exp(i s) / (2 sqrt s) ds, close with
    // the segment up to a far point plus the leading asymptotic remainder
    const double far = 400.0;
    const cplx seg = oracle::gauss_pieces([](double v) { return std::exp(1i * v * v); }, u, far, 20000);
    const cplx rest = -std::exp(1i * far * far) / (2i * far) * (1.0 + 1.0 / (2i * far * far));
    CHECK(std::abs(fresnel_tail(u) - (seg + rest)) < 1e-10);
  }
}

TEST_CASE("Fresnel segments far out keep their digits") {
  for (auto [u1, u2] : {std::pair{300.0, 300.01}, std::pair{-50.0, -49.9}, std::pair{0.2, 0.7}}) {
    const cplx want = oracle::gauss_pieces([](double v) { return std::exp(1i * v * v); }, u1, u2, 64);
    // exp(i v^2) itself carries a phase error of ulp(v^2) in the oracle
    CHECK(oracle::rel_err(fresnel_segment(u1, u2), want) < 1e-10);
  }
}

TEST_CASE("Taylor coefficients from Cauchy integrals") {
  const auto c = taylor_coefficients([](cplx z) { return std::exp(z); }, 0.5, 1.0, 12);
  for (int j = 0; j <= 12; ++j) CHECK(std::abs(c[j] - std::exp(0.5) / boost::math::factorial<double>(j)) < 1e-14);
}

TEST_CASE("compensated summation") {
  KahanSum s;
  s.add(1.0);
  for (int i = 0; i < 1000000; ++i) s.add(1e-16);
  s.add(-1.0);
  // the compensation term itself is summed plainly: about 1e6 roundings of 1e-16
  CHECK(std::abs(s.value().real() - 1e-10) < 1e-19);
  double naive = 1.0;
  for (int i = 0; i < 1000000; ++i) naive += 1e-16;
  CHECK(naive - 1.0 == 0.0);
}
