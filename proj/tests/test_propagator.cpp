#include <doctest.h>

#include "escape/errors.hpp"
#include "escape/propagator.hpp"
#include "escape/spectral_states.hpp"
#include "oracles.hpp"

using namespace escape;
using namespace std::complex_literals;

namespace {

const double pi = oracle::pi;
const cplx sqrt_i = std::exp(1i * pi / 4.0);

cplx fresnel_phase(double w, double t) { return std::exp(1i * w * w / (4.0 * t)); }

// Closed-form kernels typed in from their printed form, independent of the
// library's implementation.
cplx quarter_flux_kernel(double L, double x, double y, double t) {
  const cplx pre = std::exp(1i * pi * (x - y) / (2.0 * L)) / (std::sqrt(16.0 * pi * t) * sqrt_i);
  return pre * (2.0 * fresnel_phase(x - y, t) - fresnel_phase(x + y, t) - fresnel_phase(x + y - 2.0 * L, t) +
                1i * fresnel_phase(x - y + L, t) - 1i * fresnel_phase(x - y - L, t));
}

cplx free_coupling_continuum(double L, double x, double y, double t) {
  return (fresnel_phase(x - y, t) + fresnel_phase(x + y - L, t)) / (std::sqrt(16.0 * pi * t) * sqrt_i);
}

// Pointwise K2 at t = 0 for Phi = 0, typed in as a sine sum.
double k2_at_zero(double L, double x, double y, int n_terms) {
  double s = 0.0;
  for (int n = 1; n <= n_terms; ++n) s += 2.0 / L * std::sin(2 * pi * n * x / L) * std::sin(2 * pi * n * y / L);
  return s;
}

}  // namespace

TEST_CASE("K1 reproduces the closed form at (1/2, 0)") {
  const SystemParams p(1.0, 0.0, 0.5);
  const auto v = k1_kernel(p, {0.3, 0.6, 1.0});
  CHECK(std::abs(v.value - free_coupling_continuum(1.0, 0.3, 0.6, 1.0)) < 1e-6);
  for (int i = 0; i < 6; ++i) {
    const double x = oracle::uniform(0.0, 1.0), y = oracle::uniform(0.0, 1.0);
    for (double t : {0.1, 3.0}) {
      const cplx want = free_coupling_continuum(1.0, x, y, t);
      CHECK(oracle::rel_err(k1_kernel(p, {x, y, t}).value, want) < 1e-6);
    }
  }
}

TEST_CASE("K1 is the whole kernel at (1/2, pi/2)") {
  const SystemParams p(1.0, pi / 2, 0.5);
  K1Evaluator k1(p, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double x = oracle::uniform(0.0, 1.0), y = oracle::uniform(0.0, 1.0);
    const cplx want = quarter_flux_kernel(1.0, x, y, 1.0);
    CHECK(oracle::rel_err(k1(x, y).value, want) < 1e-6);
  }
}

TEST_CASE("exact kernels follow their printed forms") {
  for (double L : {1.0, 2.5})
    for (double t : {0.1, 1.0, 10.0}) {
      const double x = 0.37 * L, y = 0.81 * L;
      const auto q = exact_kernel(SystemParams(L, pi / 2, 0.5), x, y, t);
      CHECK(std::abs(q.total() - quarter_flux_kernel(L, x, y, t)) < 1e-13);
      CHECK(q.bound == cplx(0.0));
      CHECK(std::abs(exact_kernel(SystemParams(L, pi / 2, 0.5), x, x, t).total() -
                     quarter_flux_kernel(L, x, x, t)) < 1e-13);
      const auto f = exact_kernel(SystemParams(L, 0.0, 0.5), x, y, t);
      CHECK(std::abs(f.continuum - free_coupling_continuum(L, x, y, t)) < 1e-13);
      CHECK_FALSE(f.bound_convergent);
    }
  // the continuum part at (1/2, 0) is what K1 computes
  const SystemParams p(1.0, 0.0, 0.5);
  const auto e = exact_kernel(p, 0.2, 0.7, 2.0);
  CHECK(std::abs(e.total() - e.bound - k1_kernel(p, {0.2, 0.7, 2.0}).value) < 1e-6);
}

TEST_CASE("exact kernel rejects other parameter points") {
  CHECK_FALSE(has_exact_kernel(SystemParams(1.0, 1.0, 0.5)));
  CHECK_FALSE(has_exact_kernel(SystemParams(1.0, 0.0, 0.3)));
  CHECK_THROWS_AS(exact_kernel(SystemParams(1.0, 1.0, 0.5), 0.1, 0.2, 1.0), DomainError);
  CHECK_THROWS_AS(exact_kernel(SystemParams(1.0, pi / 2, 0.5), 0.1, 0.2, 0.0), DomainError);
  CHECK_THROWS_AS(k1_kernel(SystemParams(1.0, 1.0, 0.5), {0.1, 0.2, -1.0}), DomainError);
  CHECK_THROWS_AS(k2_kernel(SystemParams(1.0, 1.0, 0.5), {0.1, 0.2, 0.0}), DomainError);
  CHECK_THROWS_AS(k3_kernel(SystemParams(1.0, 0.0, 0.5), {0.1, 0.2, 0.0}), DomainError);
}

TEST_CASE("Gaussian moments: closed values") {
  CHECK(std::abs(gaussian_moment(0, 1.0, 0.0) - std::sqrt(pi)) < 1e-15);
  CHECK(std::abs(gaussian_moment(1, 1.0, 2.0) - std::sqrt(pi) * std::exp(1.0)) < 1e-14);
  CHECK(std::abs(gaussian_moment(2, 1i, 0.0) - std::sqrt(pi / 1i) / 2i) < 1e-15);
  CHECK_THROWS_AS(gaussian_moment(0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(gaussian_moment(-1, 1.0, 0.0), DomainError);
}

TEST_CASE("Gaussian moments against quadrature") {
  SUBCASE("n = 1, a = 1, b = 2 on (-40, 40)") {
    const cplx q = oracle::gauss_pieces([](double k) { return cplx(k * std::exp(-k * k + 2 * k)); }, -40, 40, 400);
    CHECK(oracle::rel_err(gaussian_moment(1, 1.0, 2.0), q) < 1e-12);
  }
  SUBCASE("random complex (a, b), n <= 6") {
    for (int i = 0; i < 20; ++i) {
      const cplx a(oracle::uniform(0.5, 2.0), oracle::uniform(-2.0, 2.0));
      const cplx b(oracle::uniform(-2.0, 2.0), oracle::uniform(-2.0, 2.0));
      const int n = i % 7;
      const cplx q = oracle::gauss_pieces(
          [&](double k) { return std::pow(k, n) * std::exp(-a * k * k + b * k); }, -30.0, 30.0, 600);
      CHECK(oracle::rel_err(gaussian_moment(n, a, b), q) < 1e-9);
    }
  }
  SUBCASE("purely imaginary a as the limit of a Gaussian regulator") {
    // int k^2 exp(-(eta + i) k^2) dk by brute force, then eta -> 0 linearly
    const cplx limit = gaussian_moment(2, 1i, 0.0);
    double last = 1.0;
    for (double eta : {0.2, 0.1, 0.05}) {
      const double R = std::sqrt(40.0 / eta);
      const cplx q = oracle::gauss_pieces([&](double k) { return k * k * std::exp(-(eta + 1i) * k * k); }, -R, R,
                                          int(R * R));
      CHECK(oracle::rel_err(gaussian_moment(2, eta + 1i, 0.0), q) < 1e-9);
      const double gap = std::abs(q - limit);
      CHECK(gap < last);
      last = gap;
    }
    CHECK(last < 0.1);
  }
  SUBCASE("Fresnel self-consistency") {
    for (double t : {0.3, 2.0, 50.0})
      for (double z : {0.0, 0.7, -3.0}) {
        const cplx want = std::sqrt(pi / (1i * t)) * std::exp(1i * z * z / (4.0 * t));
        CHECK(std::abs(gaussian_moment(0, 1i * t, 1i * z) - want) < 1e-10);
      }
  }
}

TEST_CASE("K2 at t = 0 is the projector onto the odd loop functions") {
  const SystemParams p(1.0, 0.0, 0.5);
  SUBCASE("library sum equals the sine sum") {
    for (double x : {0.1, 0.4})
      for (double y : {0.25, 0.9}) {
        const auto v = k2_kernel(p, {x, y, 0.0, 0.0, 40});
        CHECK(std::abs(v.value - k2_at_zero(1.0, x, y, 40)) < 1e-12);
        CHECK(v.convergent);
      }
    CHECK_FALSE(k2_kernel(p, {0.1, 0.2, 1.0}).convergent);
  }
  SUBCASE("reproduces an odd function") {
    // y (L - y) (L/2 - y) is odd about L/2
    auto f = [](double y) { return y * (1 - y) * (0.5 - y); };
    for (double x : {0.15, 0.3, 0.62}) {
      const cplx r = oracle::gauss_pieces(
          [&](double y) { return k2_kernel(p, {x, y, 0.0, 0.0, 500}).value * f(y); }, 0.0, 1.0, 1200);
      CHECK(std::abs(r - f(x)) < 1e-6);
    }
  }
  SUBCASE("annihilates sin^2") {
    const auto s = InitialState::sin_squared(1.0);
    for (double x : {0.2, 0.7}) {
      const cplx r = oracle::gauss_pieces(
          [&](double y) { return k2_kernel(p, {x, y, 0.0, 0.0, 500}).value * s(y); }, 0.0, 1.0, 1200);
      CHECK(std::abs(r) < 1e-6);
      CHECK(std::abs(bound_part(p, s, x, 0.0)) < 1e-12);
    }
  }
  SUBCASE("idempotent") {
    for (double x : {0.2, 0.55})
      for (double y : {0.1, 0.8}) {
        const cplx twice = oracle::gauss_pieces(
            [&](double z) { return k2_kernel(p, {x, z, 0.0, 0.0, 20}).value * k2_kernel(p, {z, y, 0.0, 0.0, 20}).value; },
            0.0, 1.0, 80);
        CHECK(std::abs(twice - k2_kernel(p, {x, y, 0.0, 0.0, 20}).value) < 1e-10);
      }
  }
  SUBCASE("bound part of a loop bound state is the state itself") {
    const auto s = InitialState::loop_bound(2, 1.0);
    for (double x : {0.1, 0.45, 0.8}) CHECK(std::abs(bound_part(p, s, x, 0.0) - s(x)) < 1e-12);
  }
}

TEST_CASE("large-time expansion agrees with the closed forms") {
  SUBCASE("(1/2, 0): two Fresnel phases expanded to first order") {
    const SystemParams p(1.0, 0.0, 0.5);
    const double x = 0.3, y = 0.65, t = 1e3;
    const cplx root = std::sqrt(16.0 * pi) * sqrt_i;
    CHECK(std::abs(kernel_asymptotic(p, x, y, t, AsymptoticOrder::Leading) - 2.0 / (root * std::sqrt(t))) < 1e-15);
    const cplx next = 0.25i * ((x - y) * (x - y) + (x + y - 1) * (x + y - 1)) / root;
    CHECK(std::abs(kernel_asymptotic(p, x, y, t, AsymptoticOrder::Next) -
                   (2.0 / (root * std::sqrt(t)) + next / (t * std::sqrt(t)))) < 1e-15);
  }
  SUBCASE("(1/2, pi/2): the t^-3/2 coefficient of the five-term form") {
    const SystemParams p(1.0, pi / 2, 0.5);
    for (int i = 0; i < 10; ++i) {
      const double x = oracle::uniform(0.0, 1.0), y = oracle::uniform(0.0, 1.0), L = 1.0;
      auto sq = [](double w) { return w * w; };
      const cplx br = 0.25i * (2 * sq(x - y) - sq(x + y) - sq(x + y - 2 * L) + 1i * sq(x - y + L) - 1i * sq(x - y - L));
      const cplx want = std::exp(1i * pi * (x - y) / 2.0) / (std::sqrt(16.0 * pi) * sqrt_i) * br;
      CHECK(std::abs(kernel_asymptotic(p, x, y, 1.0, AsymptoticOrder::Leading) - want) < 1e-13);
    }
  }
  SUBCASE("cos Phi = 1, x = y = 0") {
    for (double eps : {0.2, 0.5}) {
      const SystemParams p(1.7, 2 * pi, eps);
      const double t = 10.0;
      const cplx pre = eps / (std::sqrt(16.0 * pi) * sqrt_i * p.a() * p.a());
      const double br = 0.5 * 1.7 * 1.7 * (p.b() / p.a()) * (p.b() / p.a());
      const cplx want = pre * (1.0 / std::sqrt(t) + 0.25i * br / (t * std::sqrt(t)));
      CHECK(std::abs(kernel_asymptotic(p, 0.0, 0.0, t, AsymptoticOrder::Next) - want) < 1e-14);
    }
  }
  SUBCASE("specialized and Maclaurin routes agree") {
    for (auto [phi, eps] : {std::pair{0.0, 0.3}, std::pair{1.0, 0.5}, std::pair{pi, 0.2}, std::pair{2.5, 0.45}}) {
      const SystemParams p(1.0, phi, eps);
      const double x = 0.21, y = 0.74, t = 50.0;
      const cplx a = kernel_asymptotic(p, x, y, t, AsymptoticOrder::Next);
      CHECK(oracle::rel_err(kernel_asymptotic_general(p, x, y, t), a) < 1e-8);
    }
  }
}

TEST_CASE("K1 approaches its asymptotic form") {
  for (auto [phi, eps] : {std::pair{1.0, 0.5}, std::pair{pi / 2, 0.3}, std::pair{2.5, 0.45}}) {
    const SystemParams p(1.0, phi, eps);
    const double t = 1e4;
    K1Evaluator k1(p, t);
    for (auto [x, y] : {std::pair{0.2, 0.6}, std::pair{0.9, 0.1}}) {
      const cplx lead = kernel_asymptotic(p, x, y, t, AsymptoticOrder::Leading);
      CHECK(std::abs(k1(x, y).value) / std::abs(lead) == doctest::Approx(1.0).epsilon(0.02));
    }
  }
  // at t = 1e3 the kernel stays within a small multiple of the leading term
  for (auto [phi, eps] : {std::pair{0.0, 0.3}, std::pair{1.0, 0.5}, std::pair{pi, 0.2}}) {
    const SystemParams p(1.0, phi, eps);
    K1Evaluator k1(p, 1e3);
    for (int i = 0; i < 20; ++i) {
      const double x = oracle::uniform(0.0, 1.0), y = oracle::uniform(0.0, 1.0);
      const cplx lead = kernel_asymptotic(p, x, y, 1e3, AsymptoticOrder::Leading);
      CHECK(std::abs(k1(x, y).value) < 10.0 * std::abs(lead));
    }
  }
}

TEST_CASE("evaluator agrees with single kernel calls") {
  const SystemParams p(1.3, 0.8, 0.37);
  K1Evaluator k1(p, 0.5);
  for (auto [x, y] : {std::pair{0.1, 1.2}, std::pair{0.65, 0.65}}) {
    const auto a = k1(x, y), b = k1_kernel(p, {x, y, 0.5});
    CHECK(std::abs(a.value - b.value) < 1e-8 * std::abs(b.value));
    CHECK(a.error >= 0.0);
  }
}
