#include "escape/nonescape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "escape/image_sum.hpp"
#include "escape/parallel.hpp"
#include "escape/propagator.hpp"
#include "escape/quadrature.hpp"
#include "escape/spectral_states.hpp"

namespace escape {

std::string to_string(PMethod m) {
  switch (m) {
    case PMethod::Auto: return "auto";
    case PMethod::ImageSum: return "image-sum";
    case PMethod::Momentum: return "momentum";
    case PMethod::DoubleMomentum: return "double-momentum";
    case PMethod::ExactKernel: return "exact-kernel";
  }
  return "?";
}

PMethod parse_method(const std::string& s) {
  for (PMethod m : {PMethod::Auto, PMethod::ImageSum, PMethod::Momentum, PMethod::DoubleMomentum, PMethod::ExactKernel})
    if (to_string(m) == s) return m;
  throw DomainError("unknown method '" + s + "' (auto, image-sum, momentum, double-momentum, exact-kernel)");
}

namespace {

constexpr int kXNodes = 20;

// Composite Gauss-Legendre rule on [0, L] with equal panels.
struct XRule {
  std::vector<double> x, w;
};

XRule x_rule(double L, int panels) {
  const auto& gl = gauss_legendre(kXNodes);
  XRule r;
  for (int j = 0; j < panels; ++j) {
    const double a = L * j / panels, b = L * (j + 1) / panels;
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < gl.size(); ++i) {
      r.x.push_back(c + h * gl.nodes()[i]);
      r.w.push_back(h * gl.weights()[i]);
    }
  }
  return r;
}

// P error implied by a pointwise error bound e on psi (Cauchy-Schwarz).
double norm_error(double p, double L, double e) { return 2.0 * std::sqrt(std::max(p, 0.0) * L) * e + L * e * e; }

}  // namespace

NonescapeSolver::NonescapeSolver(const SystemParams& p, const InitialState& psi0, NonescapeOptions opt)
    : p_(p), psi0_(psi0), opt_(opt), method_(opt.method) {
  if (std::abs(psi0.L() - p.L()) > 1e-12 * p.L())
    throw DomainError("initial state built for L = " + std::to_string(psi0.L()) + " but system has L = " +
                      std::to_string(p.L()));
  if (method_ == PMethod::Auto) method_ = PMethod::ImageSum;
  if (method_ == PMethod::ExactKernel && !has_exact_kernel(p))
    throw DomainError("exact-kernel route needs (eps, Phi) = (1/2, pi/2) or (1/2, 0)");
  p_inf_ = escape::p_infinity(p, psi0);
  if (method_ == PMethod::ImageSum) images_ = std::make_shared<KernelImages>(p);
}

NonescapeSolver::~NonescapeSolver() = default;

NonescapeValue NonescapeSolver::operator()(double t) const {
  if (!(t > 0.0)) throw DomainError("nonescape probability needs t > 0");
  switch (method_) {
    case PMethod::ImageSum: return by_images(t);
    case PMethod::Momentum: return by_momentum(t);
    case PMethod::DoubleMomentum: return by_double_momentum(t);
    case PMethod::ExactKernel: return by_exact_kernel(t);
    case PMethod::Auto: break;
  }
  throw DomainError("unresolved method");
}

NonescapeValue NonescapeSolver::finish(double p_decay, double err) const {
  NonescapeValue v;
  v.p_infinity = p_inf_;
  v.p_decay = p_decay;
  v.p = p_inf_ + p_decay;
  v.error = err;
  v.method = method_;
  if (v.p > 1.0 + 1e-6 + err)
    throw ConvergenceError("nonescape probability exceeds 1", {{"P", v.p}, {"error", err}});
  return v;
}

NonescapeValue NonescapeSolver::by_images(double t) const {
  const double L = p_.L();
  auto integrate = [&](int panels, double* perr) {
    const XRule r = x_rule(L, panels);
    KahanSum s;
    double emax = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      double e = 0.0;
      const cplx v = images_->decaying_state(psi0_, r.x[i], t, &e);
      s.add(r.w[i] * std::norm(v));
      emax = std::max(emax, e);
    }
    const double pd = s.value().real();
    *perr = norm_error(pd, L, emax);
    return pd;
  };
  double e_prev = 0.0, e_cur = 0.0;
  double prev = integrate(2, &e_prev);
  for (int lvl = 1, panels = 4; lvl <= opt_.max_refinements; ++lvl, panels *= 2) {
    const double cur = integrate(panels, &e_cur);
    const double diff = std::abs(cur - prev);
    if (diff <= std::max({opt_.abs_tol, opt_.rel_tol * std::abs(cur), 2.0 * (e_cur + e_prev)}))
      return finish(cur, diff + e_cur);
    prev = cur;
    e_prev = e_cur;
  }
  throw ConvergenceError("loop quadrature of |psi_dec|^2 did not converge", {{"t", t}, {"last", prev}});
}

namespace {

// h(k) = f1(k) u(-k) + f2(k) u(k) with u(kappa) = int exp(i kappa y) exp(-i Phi y / L) psi0(y) dy
template <class K>
cplx amplitude(const SystemParams& p, const InitialState& psi0, K k) {
  const double g = p.phi() / p.L();
  const cplx kk(k);
  return f1(p, kk) * psi0.moment(-kk - g) + f2(p, kk) * psi0.moment(kk - g);
}

}  // namespace

NonescapeValue NonescapeSolver::by_momentum(double t) const {
  const double L = p_.L();
  const double strip = pole_distance(p_);
  double c = std::max(opt_.cutoff > 0.0 ? opt_.cutoff : 50.0 / L, minimal_chirp_cutoff(t, L, strip, L));
  const XRule xr = x_rule(L, 8);
  auto level = [&](double cut, double* perr) {
    ChirpIntegrator rule(t, cut, L, strip, kPi / L);
    std::vector<cplx> h(rule.nodes().size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = amplitude(p_, psi0_, rule.nodes()[i]);
    const auto tail = rule.tail_data([this](cplx k) { return amplitude(p_, psi0_, k); });
    KahanSum s;
    double emax = 0.0;
    for (std::size_t i = 0; i < xr.x.size(); ++i) {
      double e = 0.0;
      const cplx v = rule.integrate(h, tail, xr.x[i], &e);
      s.add(xr.w[i] * std::norm(v));
      emax = std::max(emax, e);
    }
    const double pd = s.value().real();
    *perr = norm_error(pd, L, emax);
    return pd;
  };
  double e_prev = 0.0, e_cur = 0.0;
  double prev = level(c, &e_prev);
  for (int i = 1; i <= opt_.max_refinements; ++i) {
    c *= 2.0;
    if (16.0 * t * c * c / 3.0 > 4e7)
      throw ConvergenceError("momentum route exceeds the node budget", {{"t", t}, {"cutoff", c}, {"last", prev}});
    const double cur = level(c, &e_cur);
    const double diff = std::abs(cur - prev);
    if (diff <= std::max({opt_.abs_tol, opt_.rel_tol * std::abs(cur), 2.0 * (e_cur + e_prev)}))
      return finish(cur, diff + e_cur);
    prev = cur;
    e_prev = e_cur;
  }
  throw ConvergenceError("momentum route did not converge under cutoff doubling",
                         {{"t", t}, {"cutoff", c}, {"last", prev}});
}

// Literal double integral over (k, p) in [-c, c]^2 of
//   h(k) conj(h(p)) exp(-i (k^2 - p^2) t) int_0^L exp(i (k - p) x) dx.
// No tail correction: the value converges only algebraically in c.
NonescapeValue NonescapeSolver::by_double_momentum(double t) const {
  const double L = p_.L();
  const double c = opt_.cutoff > 0.0 ? opt_.cutoff : 50.0 / L;
  ChirpIntegrator rule(t, c, L, pole_distance(p_), kPi / L);
  const auto& k = rule.nodes();
  const auto& w = rule.weights();
  const std::size_t n = k.size();
  std::vector<cplx> a(n), e(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = w[i] * amplitude(p_, psi0_, k[i]) * std::exp(-1i * (k[i] * k[i] * t));
    e[i] = std::exp(1i * (k[i] * L));
  }
  KahanSum total;
  for (std::size_t i = 0; i < n; ++i) {
    cplx row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double q = k[i] - k[j];
      const cplx E = std::abs(q) * L < 1e-3 ? power_exp_integral(q, 0, L) : (e[i] * std::conj(e[j]) - 1.0) / (1i * q);
      row += std::conj(a[j]) * E;
    }
    total.add(a[i] * row);
  }
  const double pd = total.value().real();
  return finish(pd, std::abs(total.value().imag()));
}

NonescapeValue NonescapeSolver::by_exact_kernel(double t) const {
  const double L = p_.L();
  const bool quarter = std::abs(p_.phi()) > 1e-12;  // Phi = pi/2
  const double alpha = 1.0 / (4.0 * t);
  const cplx pre = 1.0 / (std::sqrt(16.0 * kPi * t) * std::polar(1.0, kPi / 4.0));
  auto psi = [&](double x) -> cplx {
    if (quarter) {
      const double q = -kPi / (2.0 * L);
      auto C = [&](double w) { return psi0_.chirp_integral(q, alpha, w); };
      return std::exp(1i * (kPi * x / (2.0 * L))) * pre *
             (2.0 * C(x) - C(-x) - C(2.0 * L - x) + 1i * C(x + L) - 1i * C(x - L));
    }
    const cplx cont = pre * (psi0_.chirp_integral(0.0, alpha, x) + psi0_.chirp_integral(0.0, alpha, L - x));
    return cont + bound_part(p_, psi0_, x, t, 500);
  };
  auto integrate = [&](int panels) {
    const XRule r = x_rule(L, panels);
    KahanSum s;
    for (std::size_t i = 0; i < r.x.size(); ++i) s.add(r.w[i] * std::norm(psi(r.x[i])));
    return s.value().real();
  };
  double prev = integrate(2);
  for (int lvl = 1, panels = 4; lvl <= opt_.max_refinements; ++lvl, panels *= 2) {
    const double cur = integrate(panels);
    const double diff = std::abs(cur - prev);
    if (diff <= std::max({opt_.abs_tol, opt_.rel_tol * std::abs(cur), 1e-14}))
      return finish(cur - p_inf_, diff + 1e-14);
    prev = cur;
  }
  throw ConvergenceError("exact-kernel route did not converge", {{"t", t}, {"last", prev}});
}

NonescapeValue nonescape_probability(const SystemParams& p, const InitialState& psi0, double t,
                                     const NonescapeOptions& opt) {
  return NonescapeSolver(p, psi0, opt)(t);
}

cplx decaying_state(const SystemParams& p, const InitialState& psi0, double x, double t) {
  return KernelImages(p).decaying_state(psi0, x, t);
}

std::vector<double> log_time_grid(double t_min, double t_max, int per_decade) {
  if (!(t_min > 0.0) || !(t_max > t_min) || per_decade < 1)
    throw DomainError("log_time_grid needs 0 < t_min < t_max and per_decade >= 1");
  const double decades = std::log10(t_max / t_min);
  const int n = static_cast<int>(std::round(decades * per_decade));
  std::vector<double> out;
  for (int i = 0; i <= n; ++i) out.push_back(t_min * std::pow(10.0, double(i) / per_decade));
  out.back() = t_max;
  return out;
}

TimeSeries nonescape_series(const SystemParams& p, const InitialState& psi0, const std::vector<double>& times,
                            const NonescapeOptions& opt) {
  const NonescapeSolver solver(p, psi0, opt);
  TimeSeries s;
  s.times = times;
  s.values.assign(times.size(), 0.0);
  s.errors.assign(times.size(), 0.0);
  s.method = solver.method() == PMethod::ExactKernel ? "exact-kernel" : "quadrature";
  parallel_for(times.size(), [&](std::size_t i) {
    const auto v = solver(times[i]);
    s.values[i] = v.p;
    s.errors[i] = v.error;
  });
  return s;
}

// ---------------------------------------------------------------------------

namespace {

// R = int_0^L conj(g(y)) g(L - y) dy with g(y) = exp(-i Phi y / L) psi0(y).
cplx mirror_overlap(const SystemParams& p, const InitialState& psi0) {
  const double L = p.L(), phi = p.phi();
  cplx r = 0.0;
  if (psi0.kind() != InitialState::Kind::Sampled) {
    const auto& T = psi0.exp_terms();
    for (const auto& a : T)
      for (const auto& b : T)
        r += std::conj(a.c) * b.c * std::exp(1i * (b.q * L)) * power_exp_integral(2.0 * phi / L - a.q - b.q, 0, L);
  } else {
    const auto& gl = gauss_legendre(12);
    const int panels = 512;
    for (int j = 0; j < panels; ++j)
      r += gl.integrate(
          [&](double y) { return std::exp(2i * (phi * y / L)) * std::conj(psi0(y)) * psi0(L - y); }, L * j / panels,
          L * (j + 1) / panels);
  }
  return std::exp(-1i * phi) * r;
}

double zero_tol(const InitialState& psi0) { return 1e-10 * std::sqrt(psi0.L()); }

}  // namespace

double p_infinity(const SystemParams& p, const InitialState& psi0) {
  if (p.flux_class() == FluxClass::Generic) return 0.0;
  const double re = mirror_overlap(p, psi0).real();
  const double v = p.flux_class() == FluxClass::Periodic ? 0.5 * (1.0 - re) : 0.5 * (1.0 + re);
  return std::clamp(v, 0.0, 1.0);
}

double p_infinity_projector(const SystemParams& p, const InitialState& psi0, int n_terms) {
  if (p.flux_class() == FluxClass::Generic) return 0.0;
  const int n0 = p.flux_class() == FluxClass::Periodic ? 1 : 0;
  const double g = p.phi() / p.L();
  double s = 0.0;
  for (int n = n0; n <= n_terms; ++n) {
    const double k = flux_bound_state(p, n).k();
    s += std::norm(std::sqrt(2.0 / p.L()) / 2i * (psi0.moment(k - g) - psi0.moment(-k - g)));
  }
  return s;
}

double c1_coefficient(const SystemParams& p, const InitialState& psi0) {
  if (p.flux_class() != FluxClass::Periodic) return 0.0;
  const double a = p.a(), eps = p.epsilon();
  return eps * eps * p.L() / (8.0 * a * a * a * a) * std::norm(fourier_moment(psi0, p.phi() / p.L(), 0));
}

double c3_coefficient(const SystemParams& p, const InitialState& psi0) {
  const double L = p.L(), eps = p.epsilon(), k = p.phi() / L;
  const cplx m0 = fourier_moment(psi0, k, 0), m1 = fourier_moment(psi0, k, 1);
  if (p.flux_class() == FluxClass::Periodic) {
    if (std::abs(m0) > zero_tol(psi0))
      throw DomainError("leading power is 1 (C1 != 0); the C3 formula for cos(Phi) = 1 is not applicable");
    const double a4 = std::pow(p.a(), 4);
    const cplx m2 = fourier_moment(psi0, k, 2);
    return eps * eps * L / (128.0 * a4) * std::norm(L * m1 - 1i * m2);
  }
  const double c = p.cos_phi(), s = p.sin_phi(), b4 = std::pow(p.b(), 4);
  return eps * eps * L * L * L * (2.0 + c) / (96.0 * b4 * std::pow(1.0 - c, 4)) *
         std::norm(L * m0 - cplx(s, 1.0 - c) * m1);
}

namespace {
bool flux_matches_index(const SystemParams& p, int n) {
  return std::abs(std::abs(p.phi()) - 2.0 * kPi * n) < 1e-9;
}
}  // namespace

double c1_bound_state(const SystemParams& p, int n) {
  if (n < 1) throw DomainError("loop bound state index must be >= 1");
  if (p.flux_class() != FluxClass::Periodic || !flux_matches_index(p, n)) return 0.0;
  const double a4 = std::pow(p.a(), 4), eps = p.epsilon(), L = p.L();
  return L * L * eps * eps / (32.0 * kPi * a4);
}

double c3_bound_state(const SystemParams& p, int n) {
  if (n < 1) throw DomainError("loop bound state index must be >= 1");
  const double L = p.L(), eps = p.epsilon(), phi = p.phi();
  const double L6 = std::pow(L, 6);
  const double den = std::pow(phi - 2.0 * kPi * n, 4) * std::pow(phi + 2.0 * kPi * n, 4);
  if (p.flux_class() == FluxClass::Periodic) {
    if (flux_matches_index(p, n))
      throw DomainError("leading power is 1 (C1 != 0) at |Phi| = 2 n pi; C3 is not the leading coefficient");
    return n * n * eps * eps * phi * phi * L6 * kPi / (2.0 * std::pow(p.a(), 4) * den);
  }
  const double c = p.cos_phi();
  return 2.0 * n * n * eps * eps * phi * phi * L6 * kPi * (2.0 + c) /
         (3.0 * std::pow(p.b(), 4) * (1.0 - c) * (1.0 - c) * den);
}

DecayReport decay_report(const SystemParams& p, const InitialState& psi0) {
  DecayReport r;
  r.p_infinity = p_infinity(p, psi0);
  if (p.flux_class() == FluxClass::Periodic) {
    r.c1 = c1_coefficient(p, psi0);
    const bool c1_zero = std::abs(fourier_moment(psi0, p.phi() / p.L(), 0)) <= zero_tol(psi0);
    if (!c1_zero) {
      r.delta = 1;
      r.c_delta = r.c1;
      r.note = "cos(Phi) = 1 and psi0~(Phi/L) != 0";
      return r;
    }
    r.c1 = 0.0;  // cascade: C1 = 0 forces C2 = 0
  }
  r.c3 = c3_coefficient(p, psi0);
  if (r.c3 <= 1e-20 * std::pow(p.L(), 6)) {
    r.c3 = 0.0;
    r.higher_order = true;
    r.note = r.p_infinity >= 1.0 - 1e-12 ? "psi0 lies in the bound subspace: no decay"
                                         : "C1 and C3 vanish: higher-order decay, not computed";
    return r;
  }
  r.delta = 3;
  r.c_delta = r.c3;
  return r;
}

TimeSeries rescale(const TimeSeries& s, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("rescale needs lambda > 0");
  TimeSeries out = s;
  for (auto& t : out.times) t *= lambda * lambda;
  return out;
}

DecayReport rescale(const DecayReport& r, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("rescale needs lambda > 0");
  DecayReport out = r;
  const double l2 = lambda * lambda;
  out.c1 *= l2;
  out.c3 *= l2 * l2 * l2;
  if (r.delta > 0) out.c_delta *= std::pow(l2, r.delta);
  return out;
}

PowerLawFit power_law_fit(const TimeSeries& s, double p_inf, double t_lo, double t_hi) {
  if (s.times.empty()) throw DomainError("power_law_fit: empty series");
  if (t_lo <= 0.0 && t_hi <= 0.0) {
    t_hi = s.times.back();
    t_lo = t_hi / 10.0;
  }
  std::vector<double> lx, ly;
  int noisy = 0;
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    const double t = s.times[i];
    if (t < t_lo * (1.0 - 1e-12) || t > t_hi * (1.0 + 1e-12)) continue;
    const double d = s.values[i] - p_inf;
    const double e = i < s.errors.size() ? s.errors[i] : 0.0;
    if (!(d > 10.0 * e) || !(d > 0.0)) {
      ++noisy;
      continue;
    }
    lx.push_back(std::log(t));
    ly.push_back(std::log(d));
  }
  if (lx.size() < 10)
    throw ConvergenceError("power-law tail dominated by noise", {{"usable_points", double(lx.size())},
                                                                 {"rejected_points", double(noisy)}});
  const double n = double(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  const double slope = sxy / sxx, icpt = my - slope * mx;
  double res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) res += std::pow(ly[i] - (icpt + slope * lx[i]), 2);
  return {-slope, std::exp(icpt), static_cast<int>(lx.size()), std::sqrt(res / n)};
}

}  // namespace escape
