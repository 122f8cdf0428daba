#include "escape/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "escape/quadrature.hpp"
#include "escape/spectral_states.hpp"

namespace escape {

namespace {

const cplx kSqrtI = std::polar(1.0, kPi / 4.0);

double analytic_radius(double strip, double L) { return std::min(0.5 * strip, 1.0 / L); }

// Truncated power series helpers for the tail expansion.
using Series = std::vector<cplx>;

Series mul(const Series& a, const Series& b, std::size_t order) {
  Series r(order + 1, 0.0);
  for (std::size_t i = 0; i <= order && i < a.size(); ++i)
    for (std::size_t j = 0; i + j <= order && j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

Series deriv(const Series& a) {
  if (a.size() <= 1) return {};
  Series r(a.size() - 1);
  for (std::size_t i = 1; i < a.size(); ++i) r[i - 1] = double(i) * a[i];
  return r;
}

}  // namespace

inline constexpr double kMaxChirpNodes = 4e7;

double minimal_chirp_cutoff(double t, double zmax, double strip, double L) {
  const double r = analytic_radius(strip, L);
  return std::max(30.0 / (t * r), 2.0 * zmax / t);
}

ChirpIntegrator::ChirpIntegrator(double t, double cutoff, double zmax, double strip, double period)
    : t_(t) {
  if (!(t > 0.0)) throw DomainError("chirp integral needs t > 0");
  const double L = kPi / period;
  radius_ = analytic_radius(strip, L);
  const long cells = std::max(1L, static_cast<long>(std::ceil(cutoff / period - 1e-9)));
  c_ = cells * period;
  const auto& gl = gauss_legendre(16);
  const double max_width = std::isfinite(strip) ? strip : period;
  for (long j = -cells; j < cells; ++j) {
    const double lo = j * period, hi = lo + period;
    const double var = t * std::abs(hi * hi - lo * lo) + zmax * period;
    const long nsub = std::max({1L, static_cast<long>(std::ceil(var / 6.0)),
                                static_cast<long>(std::ceil(period / max_width))});
    for (long s = 0; s < nsub; ++s) {
      const double a = lo + period * s / nsub, b = lo + period * (s + 1) / nsub;
      const double c = 0.5 * (a + b), h = 0.5 * (b - a);
      for (int i = 0; i < gl.size(); ++i) {
        k_.push_back(c + h * gl.nodes()[i]);
        w_.push_back(h * gl.weights()[i]);
      }
    }
  }
}

ChirpIntegrator::Tail ChirpIntegrator::tail_data(const Amplitude& g) const {
  Tail tail;
  const int order = tail_order();
  tail.right = taylor_coefficients(g, c_, radius_, order);
  auto left = taylor_coefficients(g, -c_, radius_, order);
  for (int j = 0; j <= order; ++j) left[j] *= (j % 2 ? -1.0 : 1.0);  // g(-u) about u = c
  tail.left = std::move(left);
  return tail;
}

// int_c^inf g(k) exp(i phi(k)) dk with phi = -t k^2 + z k, by repeated
// integration by parts carried out on truncated Taylor series at k = c.
cplx ChirpIntegrator::tail_integral(const std::vector<cplx>& taylor, double z, double* err) const {
  const double a0 = z - 2.0 * t_ * c_, a1 = -2.0 * t_;
  const std::size_t order = taylor.size() - 1;
  Series inv(order + 1);
  cplx r = 1.0 / (1i * a0);
  for (std::size_t j = 0; j <= order; ++j) {
    inv[j] = r;
    r *= -a1 / a0;
  }
  Series g = taylor;
  cplx total = 0.0, last = 0.0;
  while (!g.empty()) {
    const Series pj = mul(g, inv, g.size() - 1);
    last = pj[0];
    total += last;
    g = deriv(pj);
    for (auto& v : g) v = -v;
  }
  const cplx e = std::exp(1i * (-t_ * c_ * c_ + z * c_));
  if (err) *err += std::abs(last);
  return -e * total;
}

cplx ChirpIntegrator::integrate(const std::vector<cplx>& g_nodes, const Tail& tail, double z, double* err) const {
  KahanSum sum;
  double noise2 = 0.0;  // rounding of the phases, accumulated as a random walk
  for (std::size_t i = 0; i < k_.size(); ++i) {
    const double k = k_[i];
    const double phase = k * k * t_ - k * z;
    const cplx term = w_[i] * g_nodes[i] * std::exp(-1i * phase);
    sum.add(term);
    const double r = std::abs(term) * (std::abs(phase) + 1.0);
    noise2 += r * r;
  }
  double e = 0.0;
  cplx v = sum.value() + tail_integral(tail.right, z, &e) + tail_integral(tail.left, -z, &e);
  if (err) *err = e + 4.0 * std::numeric_limits<double>::epsilon() * std::sqrt(noise2);
  return v;
}

// ---------------------------------------------------------------------------

struct K1Evaluator::Level {
  std::unique_ptr<ChirpIntegrator> rule;
  std::vector<cplx> f1w, f2w;  // f1, f2 sampled at the nodes
  ChirpIntegrator::Tail tail1, tail2;
};

K1Evaluator::K1Evaluator(const SystemParams& p, double t, const K1Options& opt, double start_cutoff)
    : p_(p), t_(t), opt_(opt) {
  if (!(t > 0.0)) throw DomainError("K1 needs t > 0");
  const double strip = pole_distance(p);
  const double c_min = minimal_chirp_cutoff(t, 2.0 * p.L(), strip, p.L());
  // 50/L at short times; past t = L^2 the asymptotic tails take over sooner,
  // so shrink like 1/sqrt(t) and keep the node count flat
  const double c_default = 50.0 / p.L() / std::max(1.0, std::sqrt(t) / p.L());
  c0_ = std::max({start_cutoff > 0.0 ? start_cutoff : c_default, c_min});
}

K1Evaluator::~K1Evaluator() = default;

namespace {
std::mutex k1_level_mutex;
}

const K1Evaluator::Level& K1Evaluator::level(int i) const {
  std::lock_guard<std::mutex> lock(k1_level_mutex);
  while (static_cast<int>(levels_.size()) <= i) {
    const double c = c0_ * std::ldexp(1.0, static_cast<int>(levels_.size()));
    const double nodes = 16.0 * (t_ * c * c / 3.0 + 2.0 * c * p_.L() / kPi);
    if (nodes > kMaxChirpNodes)
      throw ConvergenceError("K1 cutoff schedule exceeds the node budget", {{"t", t_}, {"cutoff", c}, {"nodes", nodes}});
    auto lv = std::make_unique<Level>();
    lv->rule = std::make_unique<ChirpIntegrator>(t_, c, 2.0 * p_.L(), pole_distance(p_), kPi / p_.L());
    const auto& k = lv->rule->nodes();
    lv->f1w.resize(k.size());
    lv->f2w.resize(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) {
      lv->f1w[j] = f1(p_, k[j]);
      lv->f2w[j] = f2(p_, k[j]);
    }
    const SystemParams pp = p_;
    lv->tail1 = lv->rule->tail_data([pp](cplx k) { return f1(pp, k); });
    lv->tail2 = lv->rule->tail_data([pp](cplx k) { return f2(pp, k); });
    levels_.push_back(std::move(lv));
  }
  return *levels_[i];
}

KernelValue K1Evaluator::operator()(double x, double y) const {
  const cplx gauge = std::exp(1i * (p_.phi() * (x - y) / p_.L()));
  auto eval = [&](int i, double* err) {
    const Level& lv = level(i);
    double e1 = 0.0, e2 = 0.0;
    const cplx v = lv.rule->integrate(lv.f1w, lv.tail1, x - y, &e1) + lv.rule->integrate(lv.f2w, lv.tail2, x + y, &e2);
    *err = e1 + e2;
    return gauge * v;
  };
  double err_prev = 0.0, err = 0.0;
  cplx prev = eval(0, &err_prev);
  for (int i = 1; i <= opt_.max_doublings; ++i) {
    const cplx cur = eval(i, &err);
    const double diff = std::abs(cur - prev);
    if (diff <= std::max({opt_.abs_tol, opt_.rel_tol * std::abs(cur), 2.0 * (err + err_prev)}))
      return {cur, diff + err, level(i).rule->cutoff(), true};
    prev = cur;
    err_prev = err;
  }
  throw ConvergenceError("K1 quadrature did not converge under cutoff doubling",
                         {{"x", x}, {"y", y}, {"t", t_}, {"last_re", prev.real()}, {"last_im", prev.imag()},
                          {"cutoff", level(opt_.max_doublings).rule->cutoff()}});
}

KernelValue k1_kernel(const SystemParams& p, const KernelRequest& req, const K1Options& opt) {
  K1Evaluator ev(p, req.t, opt, req.cutoff);
  return ev(req.x, req.y);
}

// ---------------------------------------------------------------------------

namespace {

KernelValue bound_kernel(const SystemParams& p, const KernelRequest& req, bool odd) {
  if (req.n_terms < 1) throw DomainError("n_terms must be >= 1");
  const double L = p.L(), x = req.x, y = req.y, t = req.t;
  const int N = req.n_terms;
  // pair +k and -k: each pair gives (1/L) e^{-i k^2 t} [cos k(x-y) - cos k(x+y)]
  std::vector<cplx> partial;
  cplx s = 0.0;
  const int n_lo = odd ? 0 : 1;
  for (int n = n_lo; n <= N; ++n) {
    const double k = (odd ? 2.0 * n + 1.0 : 2.0 * n) * kPi / L;
    s += std::exp(-1i * (k * k * t)) * (std::cos(k * (x - y)) - std::cos(k * (x + y))) / L;
    partial.push_back(s);
  }
  double err = 0.0;
  for (std::size_t i = partial.size() - std::max<std::size_t>(1, partial.size() / 10); i < partial.size(); ++i)
    err = std::max(err, std::abs(partial[i] - s));
  const cplx gauge = std::exp(1i * (p.phi() * (x - y) / L));
  return {gauge * s, err, 0.0, t == 0.0};
}

}  // namespace

KernelValue k2_kernel(const SystemParams& p, const KernelRequest& req) {
  if (p.flux_class() != FluxClass::Periodic) throw DomainError("K2 requires cos(Phi) = 1");
  return bound_kernel(p, req, false);
}

KernelValue k3_kernel(const SystemParams& p, const KernelRequest& req) {
  if (p.flux_class() != FluxClass::AntiPeriodic) throw DomainError("K3 requires cos(Phi) = -1");
  return bound_kernel(p, req, true);
}

cplx bound_part(const SystemParams& p, const InitialState& psi0, double x, double t, int n_terms) {
  if (p.flux_class() == FluxClass::Generic) return 0.0;
  const int n0 = p.flux_class() == FluxClass::Periodic ? 1 : 0;
  const double g = p.phi() / p.L();
  cplx s = 0.0;
  for (int n = n0; n <= n_terms; ++n) {
    const auto b = flux_bound_state(p, n);
    const double k = b.k();
    const cplx ov = std::sqrt(2.0 / p.L()) / 2i * (psi0.moment(k - g) - psi0.moment(-k - g));
    s += ov * flux_bound_state_eval(b, x) * std::exp(-1i * (k * k * t));
  }
  return s;
}

bool has_exact_kernel(const SystemParams& p) {
  if (std::abs(p.epsilon() - 0.5) > 1e-12) return false;
  return std::abs(p.phi() - kPi / 2.0) < 1e-12 || std::abs(p.phi()) < 1e-12;
}

ExactKernel exact_kernel(const SystemParams& p, double x, double y, double t, int n_terms) {
  if (!has_exact_kernel(p))
    throw DomainError("closed-form kernel available only at (eps, Phi) = (1/2, pi/2) or (1/2, 0)");
  if (!(t > 0.0)) throw DomainError("exact kernel needs t > 0");
  const double L = p.L();
  const cplx pre = 1.0 / (std::sqrt(16.0 * kPi * t) * kSqrtI);
  auto ph = [t](double w) { return std::exp(1i * (w * w / (4.0 * t))); };
  ExactKernel out{};
  if (std::abs(p.phi()) > 1e-12) {
    const cplx gauge = std::exp(1i * (kPi * (x - y) / (2.0 * L)));
    out.continuum = gauge * pre *
                    (2.0 * ph(x - y) - ph(x + y) - ph(x + y - 2.0 * L) + 1i * ph(x - y + L) - 1i * ph(x - y - L));
    out.bound = 0.0;
    out.bound_convergent = true;
    return out;
  }
  out.continuum = pre * (ph(x - y) + ph(x + y - L));
  KernelRequest req{x, y, t, 0.0, n_terms};
  const auto k2 = k2_kernel(p, req);
  out.bound = k2.value;
  out.bound_convergent = k2.convergent;
  return out;
}

cplx gaussian_moment(int n, cplx a, cplx b) {
  if (n < 0) throw DomainError("gaussian_moment needs n >= 0");
  if (a == 0.0) throw DomainError("gaussian_moment: a = 0 gives a divergent integral");
  if (a.real() < 0.0) throw DomainError("gaussian_moment: Re a < 0 gives a divergent integral");
  cplx sum = 0.0;
  double fact_n = std::tgamma(n + 1.0);
  for (int l = 0; 2 * l <= n; ++l) {
    const double coef = fact_n / (std::tgamma(l + 1.0) * std::tgamma(n - 2 * l + 1.0));
    const cplx pw = (n - 2 * l == 0) ? cplx(1.0) : std::pow(2.0 * b, n - 2 * l);
    sum += coef * pw / std::pow(4.0 * a, n - l);
  }
  return std::sqrt(kPi / a) * std::exp(b * b / (4.0 * a)) * sum;
}

cplx kernel_asymptotic(const SystemParams& p, double x, double y, double t, AsymptoticOrder order) {
  if (!(t > 0.0)) throw DomainError("kernel_asymptotic needs t > 0");
  const double L = p.L(), eps = p.epsilon(), a = p.a(), b = p.b();
  const cplx gauge = std::exp(1i * (p.phi() * (x - y) / L));
  if (p.flux_class() == FluxClass::Periodic) {
    const cplx pre = eps * gauge / (std::sqrt(16.0 * kPi) * kSqrtI * a * a);
    cplx v = pre / std::sqrt(t);
    if (order == AsymptoticOrder::Next) {
      const double br = x * x + y * y - L * (x + y) + 0.5 * L * L * (b / a) * (b / a);
      v += pre * (0.25i * br) / (t * std::sqrt(t));
    }
    return v;
  }
  const double c = p.cos_phi(), s = p.sin_phi();
  const cplx pre = -1i * eps * gauge / (8.0 * std::sqrt(kPi) * kSqrtI * b * b);
  const cplx br = (L - cplx(1.0 - c, s) * x) * (L - cplx(1.0 - c, -s) * y) / ((1.0 - c) * (1.0 - c));
  return pre * br / (t * std::sqrt(t));
}

cplx kernel_asymptotic_general(const SystemParams& p, double x, double y, double t) {
  if (!(t > 0.0)) throw DomainError("kernel_asymptotic_general needs t > 0");
  const double L = p.L();
  const double r = std::min(0.5 * pole_distance(p), 0.5 / L);
  const SystemParams pp = p;
  const auto F1 = taylor_coefficients([pp](cplx k) { return f1(pp, k); }, 0.0, r, 2);
  const auto F2 = taylor_coefficients([pp](cplx k) { return f2(pp, k); }, 0.0, r, 2);
  const double z1 = x - y, z2 = x + y;
  const cplx root = std::sqrt(kPi) / kSqrtI;  // sqrt(pi / i)
  const cplx lead = root * (F1[0] + F2[0]);
  const cplx next = root * (0.25i * (F1[0] * z1 * z1 + F2[0] * z2 * z2) + 0.5 * (F1[1] * z1 + F2[1] * z2) +
                            (F1[2] + F2[2]) / 2i);
  const cplx gauge = std::exp(1i * (p.phi() * (x - y) / L));
  return gauge * (lead / std::sqrt(t) + next / (t * std::sqrt(t)));
}

}  // namespace escape
