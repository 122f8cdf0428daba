#include "escape/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "escape/quadrature.hpp"

namespace escape {

Coupling coupling_constants(double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 0.5)
    throw DomainError("coupling epsilon must lie in (0, 1/2]; epsilon = 0 is the uncoupled case, got " +
                      std::to_string(epsilon));
  const double s = std::sqrt(std::max(0.0, 1.0 - 2.0 * epsilon));
  return {0.5 * (s - 1.0), 0.5 * (s + 1.0)};
}

SystemParams::SystemParams(double L, double phi, double epsilon) : L_(L), phi_(phi), eps_(epsilon) {
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("loop length L must be positive");
  if (!std::isfinite(phi)) throw DomainError("flux must be finite");
  auto [a, b] = coupling_constants(epsilon);
  a_ = a;
  b_ = b;
  cos_phi_ = std::cos(phi);
  sin_phi_ = std::sin(phi);
  if (std::abs(cos_phi_ - 1.0) < kFluxDispatchTol)
    cls_ = FluxClass::Periodic;
  else if (std::abs(cos_phi_ + 1.0) < kFluxDispatchTol)
    cls_ = FluxClass::AntiPeriodic;
  else
    cls_ = FluxClass::Generic;
}

Matrix3c scattering_matrix(double epsilon) {
  auto [a, b] = coupling_constants(epsilon);
  const double r = std::sqrt(epsilon);
  return {{{-(a + b), r, r}, {r, a, b}, {r, b, a}}};
}

double BoundaryResiduals::max_abs() const {
  return std::max({std::abs(r1), std::abs(r2), std::abs(r3)});
}

BoundaryResiduals boundary_residuals(const SystemParams& p, cplx psi0p, cplx psiLm, cplx psiLp,
                                     cplx dpsi0p, cplx dpsiLm, cplx dpsiLp) {
  const double se = std::sqrt(p.epsilon());
  return {psi0p - psiLm, se * psi0p - p.b() * psiLp, se * dpsiLp + p.b() * (dpsi0p - dpsiLm)};
}

// ---------------------------------------------------------------------------

cplx power_exp_integral(cplx beta, int p, double L) {
  if (p < 0) throw DomainError("power_exp_integral: negative power");
  const cplx z = 1i * beta * L;
  if (std::abs(z) <= 2.0) {
    // sum_j z^j / j! * L^(p+1) / (p+j+1)
    cplx term = 1.0, sum = 0.0;
    for (int j = 0; j < 80; ++j) {
      const cplx add = term / double(p + j + 1);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum) && j > 2) break;
      term *= z / double(j + 1);
    }
    return sum * std::pow(L, p + 1);
  }
  const cplx ib = 1i * beta;
  const cplx e = std::exp(z);
  cplx I = (e - 1.0) / ib;
  double Lp = 1.0;
  for (int q = 1; q <= p; ++q) {
    Lp *= L;
    I = (Lp * e - double(q) * I) / ib;
  }
  return I;
}

namespace {

std::vector<cplx> natural_spline_moments(const std::vector<cplx>& y, double h) {
  const std::size_t n = y.size();
  std::vector<cplx> m(n, 0.0);
  if (n < 3) return m;
  // Thomas algorithm on the interior equations.
  const std::size_t k = n - 2;
  std::vector<double> cp(k);
  std::vector<cplx> dp(k);
  const double diag = 2.0 * h / 3.0, off = h / 6.0;
  for (std::size_t i = 0; i < k; ++i) {
    const cplx rhs = (y[i + 2] - 2.0 * y[i + 1] + y[i]) / h;
    const double denom = diag - (i ? off * cp[i - 1] : 0.0);
    cp[i] = off / denom;
    dp[i] = (rhs - (i ? off * dp[i - 1] : cplx(0.0))) / denom;
  }
  m[k] = dp[k - 1];
  for (std::size_t i = k - 1; i-- > 0;) m[i + 1] = dp[i] - cp[i] * m[i + 2];
  return m;
}

// Cubic on one spline interval as coefficients of s = y - y_i.
std::array<cplx, 4> interval_poly(const std::vector<cplx>& y, const std::vector<cplx>& m, double h,
                                  std::size_t i) {
  return {y[i], (y[i + 1] - y[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0, m[i] / 2.0,
          (m[i + 1] - m[i]) / (6.0 * h)};
}

}  // namespace

InitialState InitialState::loop_bound(int n, double L) {
  if (n < 1) throw DomainError("loop bound state index must be >= 1");
  if (!(L > 0.0)) throw DomainError("loop length L must be positive");
  InitialState s;
  s.kind_ = Kind::LoopBound;
  s.L_ = L;
  s.label_ = "LoopBound(n=" + std::to_string(n) + ")";
  const double q = 2.0 * kPi * n / L;
  const cplx c = std::sqrt(2.0 / L) / 2i;
  s.terms_ = {{c, q}, {-c, -q}};
  return s;
}

InitialState InitialState::sin_squared(double L) {
  if (!(L > 0.0)) throw DomainError("loop length L must be positive");
  InitialState s;
  s.kind_ = Kind::SinSquared;
  s.L_ = L;
  s.label_ = "SinSquared";
  const double amp = std::sqrt(8.0 / (3.0 * L));
  const double q = 4.0 * kPi / L;
  s.terms_ = {{amp / 2.0, 0.0}, {-amp / 4.0, q}, {-amp / 4.0, -q}};
  return s;
}

InitialState InitialState::superposition(const std::vector<std::pair<cplx, int>>& terms, double L) {
  if (terms.empty()) throw DomainError("superposition needs at least one term");
  double norm2 = 0.0;
  for (const auto& [c, n] : terms) {
    if (n < 1) throw DomainError("loop bound state index must be >= 1");
    norm2 += std::norm(c);
  }
  // Distinct indices are orthonormal; repeated indices add coherently.
  std::vector<std::pair<cplx, int>> merged;
  for (const auto& [c, n] : terms) {
    auto it = std::find_if(merged.begin(), merged.end(), [n](auto& e) { return e.second == n; });
    if (it == merged.end())
      merged.emplace_back(c, n);
    else
      it->first += c;
  }
  norm2 = 0.0;
  for (const auto& e : merged) norm2 += std::norm(e.first);
  if (!(norm2 > 0.0)) throw DomainError("superposition weights vanish");
  const double scale = std::abs(norm2 - 1.0) > 1e-12 ? 1.0 / std::sqrt(norm2) : 1.0;

  InitialState s;
  s.kind_ = Kind::Superposition;
  s.L_ = L;
  std::ostringstream label;
  label << "Superposition(";
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const auto& [c, n] = merged[i];
    const cplx w = c * scale;
    const double q = 2.0 * kPi * n / L;
    const cplx cc = w * std::sqrt(2.0 / L) / 2i;
    s.terms_.push_back({cc, q});
    s.terms_.push_back({-cc, -q});
    label << (i ? ", " : "") << "(" << w.real() << (w.imag() < 0 ? "" : "+") << w.imag() << "i, n=" << n
          << ")";
  }
  label << ")";
  s.label_ = label.str();
  return s;
}

InitialState InitialState::sampled(std::vector<cplx> values, double L) {
  if (values.size() < 4) throw DomainError("sampled state needs at least 4 grid values");
  if (!(L > 0.0)) throw DomainError("loop length L must be positive");
  for (const auto& v : values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw DomainError("sampled state contains non-finite values");
  values.front() = 0.0;
  values.back() = 0.0;
  InitialState s;
  s.kind_ = Kind::Sampled;
  s.L_ = L;
  s.label_ = "Sampled(N=" + std::to_string(values.size()) + ")";
  s.spline_.h = L / double(values.size() - 1);
  s.spline_.y = std::move(values);
  s.spline_.m = natural_spline_moments(s.spline_.y, s.spline_.h);
  // exact L2 norm of the piecewise cubic: degree-6 integrand, 4-point Gauss is exact
  const auto& gl = gauss_legendre(4);
  double norm2 = 0.0;
  const double h = s.spline_.h;
  for (std::size_t i = 0; i + 1 < s.spline_.y.size(); ++i) {
    auto p = interval_poly(s.spline_.y, s.spline_.m, h, i);
    norm2 += gl.integrate(
        [&](double t) { return std::norm(p[0] + t * (p[1] + t * (p[2] + t * p[3]))); }, 0.0, h);
  }
  if (!(norm2 > 0.0)) throw DomainError("sampled state has zero norm");
  const double sc = 1.0 / std::sqrt(norm2);
  for (auto& v : s.spline_.y) v *= sc;
  for (auto& v : s.spline_.m) v *= sc;
  return s;
}

InitialState InitialState::with_winding(int m) const {
  InitialState s = *this;
  if (m == 0) return s;
  const double dq = 2.0 * kPi * m / L_;
  s.label_ += " x exp(" + std::to_string(m) + "*2pi*i*y/L)";
  if (kind_ == Kind::Sampled) {
    // Multiply nodal values and rebuild; the product is only approximated by
    // the spline, so this path is for exploration, not identities.
    for (std::size_t j = 0; j < s.spline_.y.size(); ++j)
      s.spline_.y[j] *= std::exp(1i * dq * (double(j) * s.spline_.h));
    s.spline_.m = natural_spline_moments(s.spline_.y, s.spline_.h);
    return s;
  }
  for (auto& t : s.terms_) t.q += dq;
  return s;
}

std::string InitialState::describe() const { return label_; }

cplx InitialState::spline_value(double x) const {
  const double h = spline_.h;
  const std::size_t n = spline_.y.size();
  std::size_t i = std::min<std::size_t>(n - 2, static_cast<std::size_t>(std::max(0.0, x / h)));
  auto p = interval_poly(spline_.y, spline_.m, h, i);
  const double s = x - double(i) * h;
  return p[0] + s * (p[1] + s * (p[2] + s * p[3]));
}

cplx InitialState::spline_derivative(double x) const {
  const double h = spline_.h;
  const std::size_t n = spline_.y.size();
  std::size_t i = std::min<std::size_t>(n - 2, static_cast<std::size_t>(std::max(0.0, x / h)));
  auto p = interval_poly(spline_.y, spline_.m, h, i);
  const double s = x - double(i) * h;
  return p[1] + s * (2.0 * p[2] + 3.0 * s * p[3]);
}

cplx InitialState::operator()(double x) const {
  if (x < 0.0 || x > L_) return 0.0;
  if (kind_ == Kind::Sampled) return spline_value(x);
  cplx v = 0.0;
  for (const auto& t : terms_) v += t.c * std::exp(1i * (t.q * x));
  // the analytic states vanish at both ends; suppress the rounding residue
  if (x == 0.0 || x == L_) return 0.0;
  return v;
}

cplx InitialState::derivative(double x) const {
  if (x < 0.0 || x > L_) return 0.0;
  if (kind_ == Kind::Sampled) return spline_derivative(x);
  cplx v = 0.0;
  for (const auto& t : terms_) v += 1i * t.q * t.c * std::exp(1i * (t.q * x));
  return v;
}

cplx InitialState::moment(cplx kappa, int power) const {
  if (kind_ != Kind::Sampled) {
    cplx sum = 0.0;
    for (const auto& t : terms_) sum += t.c * power_exp_integral(kappa + t.q, power, L_);
    return sum;
  }
  // piecewise cubic times (y_i + s)^power, integrated exactly in s
  const double h = spline_.h;
  cplx sum = 0.0;
  std::vector<double> binom(power + 1);
  for (std::size_t i = 0; i + 1 < spline_.y.size(); ++i) {
    const double yi = double(i) * h;
    auto p = interval_poly(spline_.y, spline_.m, h, i);
    // coefficients of (yi + s)^power
    double c = 1.0;
    for (int r = 0; r <= power; ++r) {
      binom[r] = c * std::pow(yi, power - r);
      c = c * double(power - r) / double(r + 1);
    }
    cplx local = 0.0;
    for (int d = 0; d < 4; ++d)
      for (int r = 0; r <= power; ++r)
        if (binom[r] != 0.0) local += p[d] * binom[r] * power_exp_integral(kappa, d + r, h);
    sum += std::exp(1i * kappa * yi) * local;
  }
  return sum;
}

namespace {

// int_0^L exp(i Q y) exp(i alpha (y - y0)^2) dy via the Fresnel primitive.
cplx chirp_plane_wave(double Q, double alpha, double y0, double L) {
  const double y1 = y0 - Q / (2.0 * alpha);
  const double sa = std::sqrt(alpha);
  // exponent: i (Q y0 - Q^2 / (4 alpha)) collected as a phase
  const double phase = Q * y0 - Q * Q / (4.0 * alpha);
  return std::exp(1i * phase) / sa * fresnel_segment(sa * (0.0 - y1), sa * (L - y1));
}

}  // namespace

cplx InitialState::chirp_integral(double q, double alpha, double y0) const {
  if (!(alpha > 0.0)) throw DomainError("chirp_integral requires alpha > 0");
  if (kind_ != Kind::Sampled) {
    cplx sum = 0.0;
    for (const auto& t : terms_) sum += t.c * chirp_plane_wave(q + t.q, alpha, y0, L_);
    return sum;
  }
  // Gauss-Legendre per spline interval, subdivided by the phase variation.
  const auto& gl = gauss_legendre(16);
  const double h = spline_.h;
  cplx sum = 0.0;
  for (std::size_t i = 0; i + 1 < spline_.y.size(); ++i) {
    const double ya = double(i) * h, yb = ya + h;
    const double da = ya - y0, db = yb - y0;
    const double var = std::abs(alpha * (db * db - da * da) + q * h);
    const int nsub = 1 + static_cast<int>(var / 1.5);
    auto p = interval_poly(spline_.y, spline_.m, h, i);
    for (int j = 0; j < nsub; ++j) {
      const double s0 = h * j / nsub, s1 = h * (j + 1) / nsub;
      sum += gl.integrate(
          [&](double s) {
            const double y = ya + s;
            return (p[0] + s * (p[1] + s * (p[2] + s * p[3]))) *
                   std::exp(1i * (q * y + alpha * (y - y0) * (y - y0)));
          },
          s0, s1);
    }
  }
  return sum;
}

int InitialState::mirror_parity() const {
  bool even = true, odd = true;
  double scale = 0.0;
  for (int j = 1; j < 64; ++j) {
    const double x = L_ * (j + 0.31) / 64.5;
    const cplx u = (*this)(x), v = (*this)(L_ - x);
    scale = std::max(scale, std::abs(u));
    if (std::abs(u - v) > 1e-12 * (1.0 + std::abs(u))) even = false;
    if (std::abs(u + v) > 1e-12 * (1.0 + std::abs(u))) odd = false;
  }
  if (even && !odd) return 1;
  if (odd && !even) return -1;
  return 0;
}

cplx fourier_moment(const InitialState& s, double k, int n) {
  if (n < 0) throw DomainError("fourier_moment order must be non-negative");
  cplx pre = 1.0 / std::sqrt(2.0 * kPi);
  for (int j = 0; j < n; ++j) pre *= -1i;
  return pre * s.moment(-k, n);
}

double parse_flux(const std::string& text) {
  static const std::regex re(
      R"(^\s*([+-]?)\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*((?:\d+\.?\d*|\.\d+)))?\s*$)");
  std::smatch m;
  if (std::regex_match(text, m, re)) {
    double v = kPi;
    if (m[2].matched) v *= std::stod(m[2].str());
    if (m[3].matched) {
      const double d = std::stod(m[3].str());
      if (d == 0.0) throw DomainError("flux '" + text + "': division by zero");
      v /= d;
    }
    return m[1].str() == "-" ? -v : v;
  }
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw DomainError("cannot parse flux value '" + text + "' (use e.g. 0.5, pi/2, 2pi, -3*pi/4)");
}

}  // namespace escape
