#include <doctest.h>

#include "escape/core_model.hpp"
#include "escape/spectral_states.hpp"
#include "oracles.hpp"

using namespace escape;

TEST_CASE("coupling constants at the special couplings") {
  auto [a, b] = coupling_constants(0.5);
  CHECK(a == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(b == doctest::Approx(0.5).epsilon(1e-15));
  auto [a2, b2] = coupling_constants(4.0 / 9.0);
  CHECK(a2 == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(b2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("coupling identities hold across the allowed range") {
  for (int i = 1; i <= 200; ++i) {
    const double eps = 0.5 * i / 200.0;
    auto [a, b] = coupling_constants(eps);
    CHECK(a < 0.0);
    CHECK(b > 0.0);
    CHECK(std::abs(b - a - 1.0) < 1e-14);
    CHECK(std::abs(a * b + eps / 2.0) < 1e-14);
    CHECK(std::abs(a + b - std::sqrt(1.0 - 2.0 * eps)) < 1e-14);
  }
}

TEST_CASE("epsilon outside (0, 1/2] is rejected") {
  CHECK_THROWS_AS(coupling_constants(0.0), DomainError);
  CHECK_THROWS_AS(coupling_constants(-0.1), DomainError);
  CHECK_THROWS_AS(coupling_constants(0.5000001), DomainError);
  CHECK_THROWS_AS(SystemParams(1.0, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(SystemParams(0.0, 0.0, 0.3), DomainError);
}

TEST_CASE("scattering matrix at eps = 1/2") {
  const auto S = scattering_matrix(0.5);
  const double r = std::sqrt(0.5);
  const double want[3][3] = {{0, r, r}, {r, -0.5, 0.5}, {r, 0.5, -0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(S[i][j] - want[i][j]) < 1e-15);
}

TEST_CASE("scattering matrix is unitary and symmetric") {
  for (int trial = 0; trial < 100; ++trial) {
    const double eps = oracle::uniform(1e-6, 0.5);
    const auto S = scattering_matrix(eps);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        cplx u = 0.0;
        for (int m = 0; m < 3; ++m) u += S[i][m] * std::conj(S[j][m]);
        CHECK(std::abs(u - (i == j ? 1.0 : 0.0)) < 1e-14);
        CHECK(S[i][j] == S[j][i]);
      }
  }
}

TEST_CASE("boundary residual formulas") {
  const SystemParams p(1.0, 0.7, 0.3);
  auto r = boundary_residuals(p, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0);
  CHECK(r.r1 == cplx(1.0));
  CHECK(std::abs(r.r2 - std::sqrt(0.3)) < 1e-15);
  CHECK(r.r3 == cplx(0.0));
  // loop bound state: zero values, equal end slopes, nothing in the lead
  const double d = std::sqrt(2.0) * 2.0 * oracle::pi;
  CHECK(boundary_residuals(p, 0.0, 0.0, 0.0, d, d, 0.0).max_abs() == 0.0);
}

TEST_CASE("scattering eigenfunctions satisfy the vertex conditions") {
  for (double phi : {0.0, 0.4, oracle::pi / 2, oracle::pi, 2.5, 2 * oracle::pi}) {
    for (double eps : {0.1, 4.0 / 9.0, 0.5}) {
      const SystemParams p(1.3, phi, eps);
      for (int i = 0; i < 20; ++i) {
        const double k = oracle::uniform(0.05, 40.0);
        const auto c = scattering_coefficients(p, k);
        const double L = p.L();
        // left limit at L from the loop branch of the eigenfunction
        const cplx e = std::exp(1i * phi);
        const cplx vL = e * (c.A * std::exp(1i * k * L) + c.B * std::exp(-1i * k * L));
        const cplx dL = e * (1i * k * (c.A * std::exp(1i * k * L) - c.B * std::exp(-1i * k * L)) +
                             1i * (phi / L) * (c.A * std::exp(1i * k * L) + c.B * std::exp(-1i * k * L)));
        const auto r = boundary_residuals(p, eigenfunction(p, c, 0.0), vL, eigenfunction(p, c, L),
                                          eigenfunction_derivative(p, c, 0.0), dL, eigenfunction_derivative(p, c, L));
        const double scale = 1.0 + std::abs(c.A) * k;
        CHECK(r.max_abs() / scale < 1e-10);
      }
    }
  }
}

TEST_CASE("initial state values") {
  const double L = 1.7;
  CHECK(std::abs(InitialState::loop_bound(1, L)(L / 4) - std::sqrt(2.0 / L)) < 1e-15);
  CHECK(std::abs(InitialState::sin_squared(L)(L / 4) - std::sqrt(8.0 / (3.0 * L))) < 1e-15);
  for (const auto& s : {InitialState::loop_bound(3, L), InitialState::sin_squared(L),
                        InitialState::superposition({{1.0, 1}, {1i, 2}}, L)}) {
    CHECK(std::abs(s(0.0)) < 1e-15);
    CHECK(std::abs(s(L)) < 1e-14);
    CHECK(s(-0.1) == cplx(0.0));
    CHECK(s(L + 0.1) == cplx(0.0));
  }
}

TEST_CASE("every state variant is normalized") {
  const double L = 2.3;
  std::vector<cplx> samples(201);
  for (int j = 0; j <= 200; ++j) {
    const double y = L * j / 200.0;
    samples[j] = std::sin(oracle::pi * y / L) * std::exp(1i * 3.0 * y);
  }
  const std::vector<InitialState> states = {
      InitialState::loop_bound(1, L), InitialState::loop_bound(4, L), InitialState::sin_squared(L),
      InitialState::superposition({{0.6, 1}, {0.8i, 3}}, L), InitialState::superposition({{2.0, 1}, {1.0, 2}}, L),
      InitialState::sampled(samples, L)};
  for (const auto& s : states) {
    const cplx n = oracle::simpson([&](double x) { return cplx(std::norm(s(x))); }, 0.0, L, 10000);
    CHECK(std::abs(n.real() - 1.0) < 1e-10);
  }
}

TEST_CASE("mirror symmetry about L/2") {
  const double L = 1.0;
  for (int n = 1; n <= 5; ++n) {
    const auto s = InitialState::loop_bound(n, L);
    CHECK(s.mirror_parity() == -1);
    for (int i = 0; i <= 50; ++i) {
      const double x = L * i / 50.0;
      CHECK(std::abs(s(x) + s(L - x)) < 1e-14);
    }
  }
  const auto q = InitialState::sin_squared(L);
  CHECK(q.mirror_parity() == 1);
  for (int i = 0; i <= 50; ++i) {
    const double x = L * i / 50.0;
    CHECK(std::abs(q(x) - q(L - x)) < 1e-14);
  }
  CHECK(InitialState::superposition({{1.0, 1}, {1.0, 2}}, L).mirror_parity() == -1);
}

TEST_CASE("sampled states are zeroed at the endpoints and interpolate nodes") {
  const double L = 1.0;
  std::vector<cplx> v(41, 1.0);
  for (int j = 0; j <= 40; ++j) v[j] = std::sin(oracle::pi * j / 40.0) + 0.1;
  const auto s = InitialState::sampled(v, L);
  CHECK(std::abs(s(0.0)) < 1e-15);
  CHECK(std::abs(s(L)) < 1e-15);
  // interior nodes keep their (renormalized) ratios
  const cplx r = s(10.0 / 40.0) / s(20.0 / 40.0);
  CHECK(std::abs(r - v[10] / v[20]) < 1e-12);
}

TEST_CASE("Fourier moments: closed values") {
  const double L = 1.4;
  for (int n = 1; n <= 4; ++n) CHECK(std::abs(fourier_moment(InitialState::loop_bound(n, L), 0.0, 0)) < 1e-15);
  CHECK(std::abs(fourier_moment(InitialState::sin_squared(L), 0.0, 0) - std::sqrt(L / (3.0 * oracle::pi))) < 1e-14);
}

TEST_CASE("Fourier moments match direct quadrature") {
  const double L = 1.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 3;
    const int order = trial % 3;
    const double k = oracle::uniform(-60.0, 60.0);
    const auto s = InitialState::loop_bound(n, L);
    const cplx want = std::pow(-1i, order) / std::sqrt(2.0 * oracle::pi) *
                      oracle::gauss_pieces(
                          [&](double y) { return std::exp(-1i * (k * y)) * std::pow(y, order) * s(y); }, 0.0, L, 8);
    CHECK(std::abs(fourier_moment(s, k, order) - want) < 1e-10);
  }
}

TEST_CASE("Fourier moments of a real state satisfy the reflection identity") {
  const double L = 1.0;
  for (const auto& s : {InitialState::sin_squared(L), InitialState::loop_bound(2, L)})
    for (double k : {0.3, 2.0, 7.7, 31.0}) CHECK(std::abs(fourier_moment(s, -k, 0) - std::conj(fourier_moment(s, k, 0))) < 1e-15);
}

TEST_CASE("moments of sampled states agree with quadrature") {
  const double L = 1.0;
  std::vector<cplx> v(161);
  for (int j = 0; j <= 160; ++j) {
    const double y = j / 160.0;
    v[j] = y * (1 - y) * (1.0 + 0.5i * y);
  }
  const auto s = InitialState::sampled(v, L);
  for (double kappa : {0.0, 3.0, -11.0})
    for (int p = 0; p <= 2; ++p) {
      const cplx want = oracle::gauss_pieces(
          [&](double y) { return std::pow(y, p) * std::exp(1i * (kappa * y)) * s(y); }, 0.0, L, 160);
      CHECK(std::abs(s.moment(kappa, p) - want) < 1e-11);
    }
}

TEST_CASE("power_exp_integral against quadrature, including tiny and complex beta") {
  for (cplx beta : {cplx(1e-9, 0), cplx(0.3, 0), cplx(5.0, 0.2), cplx(-40.0, -1.0), cplx(0, 3)})
    for (int p = 0; p <= 4; ++p) {
      const cplx want =
          oracle::gauss_pieces([&](double y) { return std::pow(y, p) * std::exp(1i * beta * y); }, 0.0, 1.3, 16);
      CHECK(oracle::rel_err(power_exp_integral(beta, p, 1.3), want) < 1e-12);
    }
}

TEST_CASE("chirp integral against quadrature") {
  const double L = 1.0;
  const auto s = InitialState::superposition({{1.0, 1}, {0.5i, 3}}, L);
  for (double alpha : {0.025, 1.0, 25.0})
    for (double y0 : {-30.0, 0.3, 4.0}) {
      const double q = -0.7;
      const cplx want = oracle::gauss_pieces(
          [&](double y) { return s(y) * std::exp(1i * (q * y + alpha * (y - y0) * (y - y0))); }, 0.0, L, 512);
      CHECK(std::abs(s.chirp_integral(q, alpha, y0) - want) < 1e-12);
    }
}

TEST_CASE("winding partner multiplies by exp(2 pi i m y / L)") {
  const double L = 1.0;
  const auto s = InitialState::sin_squared(L);
  const auto w = s.with_winding(1);
  for (double x : {0.1, 0.45, 0.8}) CHECK(std::abs(w(x) - s(x) * std::exp(2i * oracle::pi * x / L)) < 1e-14);
  CHECK(std::abs(s.with_winding(-2)(0.3) - s(0.3) * std::exp(-4i * oracle::pi * 0.3 / L)) < 1e-14);
}

TEST_CASE("flux parser") {
  CHECK(parse_flux("pi/2") == doctest::Approx(oracle::pi / 2).epsilon(1e-15));
  CHECK(parse_flux("2pi") == doctest::Approx(2 * oracle::pi).epsilon(1e-15));
  CHECK(parse_flux("-3*pi") == doctest::Approx(-3 * oracle::pi).epsilon(1e-15));
  CHECK(parse_flux("0.25") == 0.25);
  CHECK(parse_flux("1e-05") == 1e-05);
  CHECK_THROWS_AS(parse_flux("half"), DomainError);
  CHECK_THROWS_AS(parse_flux("pi/0"), DomainError);
}

TEST_CASE("invalid states are rejected") {
  CHECK_THROWS_AS(InitialState::loop_bound(0, 1.0), DomainError);
  CHECK_THROWS_AS(InitialState::superposition({}, 1.0), DomainError);
  CHECK_THROWS_AS(InitialState::sampled({1.0, 2.0}, 1.0), DomainError);
}
