#include "escape/spectral_states.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "escape/quadrature.hpp"

namespace escape {

namespace {

template <class T>
T bracket_generic(const SystemParams& p, T theta) {
  const double a = p.a(), b = p.b(), phi = p.phi();
  const T sp = std::sin(0.5 * (theta + phi));
  const T sm = std::sin(0.5 * (theta - phi));
  const T st = std::sin(theta);
  return a * a * st * st + 4.0 * b * b * sp * sp * sm * sm;
}

// a^2 (1 + cos) + b^2 (1 - cos) for the periodic branch, swapped for the
// antiperiodic one; written with half angles to keep it exact near zeros.
template <class T>
T bracket_regular(const SystemParams& p, T theta) {
  const double a2 = p.a() * p.a(), b2 = p.b() * p.b();
  const T c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  if (p.flux_class() == FluxClass::Periodic) return 2.0 * (a2 * c * c + b2 * s * s);
  return 2.0 * (a2 * s * s + b2 * c * c);
}

template <class T>
auto f1_impl(const SystemParams& p, T k) {
  const T theta = k * p.L();
  const double eps = p.epsilon();
  if (p.flux_class() != FluxClass::Generic) return T(eps / (4.0 * kPi)) / bracket_regular(p, theta);
  const T sm = std::sin(0.5 * (theta - p.phi()));
  return eps * sm * sm / (2.0 * kPi * bracket_generic(p, theta));
}

template <class T>
cplx f2_impl(const SystemParams& p, T k) {
  const cplx theta = cplx(k) * p.L();
  const double eps = p.epsilon();
  const cplx e = std::exp(-1i * theta);
  switch (p.flux_class()) {
    case FluxClass::Periodic:
      return eps * e / (4.0 * kPi * bracket_regular(p, theta));
    case FluxClass::AntiPeriodic:
      return -eps * e / (4.0 * kPi * bracket_regular(p, theta));
    case FluxClass::Generic:
      break;
  }
  const cplx sp = std::sin(0.5 * (theta + p.phi()));
  const cplx sm = std::sin(0.5 * (theta - p.phi()));
  return eps * e * sp * sm / (2.0 * kPi * bracket_generic(p, theta));
}

double sign_plus(double v) { return v < 0.0 ? -1.0 : 1.0; }

}  // namespace

cplx den_bracket(const SystemParams& p, cplx k) { return bracket_generic(p, k * p.L()); }

double den(const SystemParams& p, double k) {
  const double br = bracket_generic(p, k * p.L());
  return std::sqrt(8.0 * kPi / p.epsilon() * std::max(0.0, br));
}

SpectralCoefficients scattering_coefficients(const SystemParams& p, double k) {
  SpectralCoefficients c;
  c.k = k;
  c.den = den(p, k);
  const double theta = k * p.L();
  const double eps = p.epsilon(), b = p.b(), se = std::sqrt(eps);

  if (p.flux_class() != FluxClass::Generic) {
    const double ch = std::abs(std::cos(0.5 * theta)), sh = std::abs(std::sin(0.5 * theta));
    const double sg = sign_plus(std::sin(theta));
    const double pre = -std::sqrt(eps / (8.0 * kPi)) * std::sqrt(2.0);
    const double root = std::sqrt(bracket_regular(p, theta));
    if (p.flux_class() == FluxClass::Periodic)
      c.A = pre * cplx(sh, sg * ch) / root;
    else
      c.A = pre * cplx(ch, -sg * sh) / root;
    c.B = -std::conj(c.A);
    c.C = -(2.0 * (b - eps) * c.A - 2.0 * b * c.B) / (2.0 * b * se);
    c.D = -std::conj(c.C);
    return c;
  }

  if (!(c.den > 0.0))
    throw DomainError("scattering coefficients singular at k = " + std::to_string(k));
  const double phi = p.phi();
  const cplx e1 = std::exp(-1i * (theta - phi));
  const cplx e2 = std::exp(1i * (theta + phi));
  const cplx common = (2.0 * b - eps) * (1.0 + std::exp(2i * phi));
  c.A = (e1 - 1.0) / c.den;
  c.B = -(e2 - 1.0) / c.den;
  c.C = (common - 2.0 * (b - eps) * e1 - 2.0 * b * e2) / (2.0 * b * se * c.den);
  c.D = -(common - 2.0 * (b - eps) * e2 - 2.0 * b * e1) / (2.0 * b * se * c.den);
  return c;
}

cplx eigenfunction(const SystemParams& p, const SpectralCoefficients& c, double x) {
  const double k = c.k, L = p.L();
  if (x < L) return (c.A * std::exp(1i * (k * x)) + c.B * std::exp(-1i * (k * x))) * std::exp(1i * (p.phi() * x / L));
  return c.C * std::exp(1i * (k * (x - L))) + c.D * std::exp(-1i * (k * (x - L)));
}

cplx eigenfunction_derivative(const SystemParams& p, const SpectralCoefficients& c, double x) {
  const double k = c.k, L = p.L(), g = p.phi() / L;
  if (x < L) {
    const cplx ep = std::exp(1i * (k * x)), em = std::exp(-1i * (k * x));
    return (1i * (k + g) * c.A * ep + 1i * (g - k) * c.B * em) * std::exp(1i * (g * x));
  }
  return 1i * k * (c.C * std::exp(1i * (k * (x - L))) - c.D * std::exp(-1i * (k * (x - L))));
}

double f1(const SystemParams& p, double k) { return f1_impl(p, k); }
cplx f1(const SystemParams& p, cplx k) { return f1_impl(p, k); }
cplx f2(const SystemParams& p, double k) { return f2_impl(p, k); }
cplx f2(const SystemParams& p, cplx k) { return f2_impl(p, k); }

double pole_distance(const SystemParams& p) {
  const double inf = std::numeric_limits<double>::infinity();
  const double a = p.a(), b = p.b(), s = a + b, L = p.L();
  if (p.flux_class() != FluxClass::Generic) {
    if (s <= 0.0) return inf;
    return std::acosh((a * a + b * b) / s) / L;
  }
  // zeros of the bracket in w = exp(i k L): (s w^2 - 2bc w + 1)(w^2 - 2bc w + s)
  const double c = p.cos_phi();
  double best = inf;
  auto consider = [&](cplx w) {
    const double m = std::abs(w);
    if (m > 0.0) best = std::min(best, std::abs(std::log(m)) / L);
  };
  auto roots = [&](double A, double B, double C) {
    if (A == 0.0) {
      if (B != 0.0) consider(-C / B);
      return;
    }
    const cplx disc = std::sqrt(cplx(B * B - 4.0 * A * C));
    const cplx q = -0.5 * (B + (B >= 0.0 ? disc : -disc));
    if (q != 0.0) {
      consider(q / A);
      consider(C / q);
    }
  };
  roots(s, -2.0 * b * c, 1.0);
  roots(1.0, -2.0 * b * c, s);
  return best;
}

double FluxBoundState::k() const {
  return (parity == Parity::Plus ? 2.0 * n : 2.0 * n + 1.0) * kPi / L;
}

FluxBoundState flux_bound_state(const SystemParams& p, int n) {
  switch (p.flux_class()) {
    case FluxClass::Periodic:
      if (n < 1) throw DomainError("plus-parity bound states start at n = 1");
      return {n, Parity::Plus, p.L(), p.phi()};
    case FluxClass::AntiPeriodic:
      if (n < 0) throw DomainError("minus-parity bound states start at n = 0");
      return {n, Parity::Minus, p.L(), p.phi()};
    case FluxClass::Generic:
      break;
  }
  throw DomainError("bound states in the continuum exist only for cos(Phi) = +-1");
}

cplx flux_bound_state_eval(const FluxBoundState& s, double x) {
  const double c = std::cos(s.phi);
  const bool ok = (s.parity == Parity::Plus) ? std::abs(c - 1.0) < kFluxDispatchTol
                                             : std::abs(c + 1.0) < kFluxDispatchTol;
  if (!ok) throw DomainError("bound-state parity does not match the flux");
  if (x < 0.0 || x >= s.L) return 0.0;
  return std::sqrt(2.0 / s.L) * std::sin(s.k() * x) * std::exp(1i * (s.phi * x / s.L));
}

cplx scattering_overlap(const SystemParams& p, const InitialState& psi0, double k) {
  const double k_abs = std::abs(k);
  const auto c = scattering_coefficients(p, k_abs);
  const double g = p.phi() / p.L();
  const cplx v = std::conj(c.A) * psi0.moment(-k_abs - g) + std::conj(c.B) * psi0.moment(k_abs - g);
  return k < 0.0 ? -v : v;
}

namespace {

cplx bound_overlap(const SystemParams& p, const InitialState& psi0, const FluxBoundState& s) {
  const double g = p.phi() / p.L(), k = s.k();
  return std::sqrt(2.0 / p.L()) / 2i * (psi0.moment(k - g) - psi0.moment(-k - g));
}

}  // namespace

cplx reconstruct_state(const SystemParams& p, const InitialState& psi0, double x, double k_max, int n_quad) {
  if (!(k_max > 0.0)) throw DomainError("reconstruct_state needs k_max > 0");
  n_quad = std::max(1, n_quad);
  const double step = kPi / p.L();
  auto integrand = [&](double k) -> cplx {
    if (k <= 0.0) return 0.0;
    const auto c = scattering_coefficients(p, k);
    return scattering_overlap(p, psi0, k) * eigenfunction(p, c, x);
  };
  cplx total = 0.0;
  // resonant grid kL = n pi; each cell split into n_quad adaptive panels
  for (double lo = 0.0; lo < k_max; lo += step) {
    const double hi = std::min(k_max, lo + step);
    for (int j = 0; j < n_quad; ++j) {
      const double a = lo + (hi - lo) * j / n_quad, b = lo + (hi - lo) * (j + 1) / n_quad;
      total += adaptive_integrate(integrand, a, b, 1e-11, nullptr, 12);
    }
  }
  if (p.flux_class() != FluxClass::Generic) {
    const int n0 = p.flux_class() == FluxClass::Periodic ? 1 : 0;
    for (int n = n0;; ++n) {
      const auto s = flux_bound_state(p, n);
      if (s.k() > k_max) break;
      total += bound_overlap(p, psi0, s) * flux_bound_state_eval(s, x);
    }
  }
  return total;
}

}  // namespace escape
