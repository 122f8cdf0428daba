#include "escape/image_sum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include "escape/spectral_states.hpp"

namespace escape {

namespace {

std::mutex fftw_planner_mutex;  // FFTW planning is not thread-safe

// c_m = (1/N) sum_j v_j exp(-2 pi i j m / N), returned in FFTW order.
std::vector<cplx> forward_fft(const std::vector<cplx>& v) {
  const int n = static_cast<int>(v.size());
  std::vector<cplx> in(v), out(n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()),
                            FFTW_FORWARD, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex);
    fftw_destroy_plan(plan);
  }
  for (auto& c : out) c /= double(n);
  return out;
}

}  // namespace

KernelImages::KernelImages(const SystemParams& p, double rel_tol) : p_(p) {
  const double L = p.L();
  constexpr int kMaxLog2 = 24;
  for (int lg = 8; lg <= kMaxLog2; ++lg) {
    const int n = 1 << lg;
    std::vector<cplx> s1(n), s2(n);
    for (int j = 0; j < n; ++j) {
      const double k = 2.0 * kPi * j / (n * L);
      s1[j] = f1(p, k);
      s2[j] = f2(p, k);
    }
    const auto c1 = forward_fft(s1), c2 = forward_fft(s2);
    auto mode = [n](int m) { return m >= 0 ? m : m + n; };
    double total = 0.0, band = 0.0;
    for (int m = -n / 2 + 1; m < n / 2; ++m) {
      const double v = std::abs(c1[mode(m)]) + std::abs(c2[mode(m)]);
      total += v;
      if (std::abs(m) >= n / 4) band = std::max(band, v);
    }
    if (band > rel_tol * total && lg < kMaxLog2) continue;
    if (band > rel_tol * total)
      throw ConvergenceError("Fourier series of f1/f2 does not converge within the FFT budget",
                             {{"fft_length", double(n)}, {"band", band}, {"total", total}});
    const double cut = rel_tol * total;
    int lo = 0, hi = 0;
    for (int m = -n / 2 + 1; m < n / 2; ++m) {
      const double v = std::abs(c1[mode(m)]) + std::abs(c2[mode(m)]);
      if (v > cut) {
        lo = std::min(lo, m);
        hi = std::max(hi, m);
      }
    }
    m_min_ = lo;
    m_max_ = hi;
    n_fft_ = n;
    total_ = total;
    dropped_ = 0.0;
    for (int m = -n / 2 + 1; m < n / 2; ++m) {
      const double v = std::abs(c1[mode(m)]) + std::abs(c2[mode(m)]);
      if (m < lo || m > hi)
        dropped_ += v;
      else {
        F1_.push_back(c1[mode(m)]);
        F2_.push_back(c2[mode(m)]);
      }
    }
    return;
  }
}

cplx KernelImages::f1_series(double k) const {
  cplx s = 0.0;
  for (int m = m_min_; m <= m_max_; ++m) s += F1(m) * std::exp(1i * (m * k * p_.L()));
  return s;
}

cplx KernelImages::f2_series(double k) const {
  cplx s = 0.0;
  for (int m = m_min_; m <= m_max_; ++m) s += F2(m) * std::exp(1i * (m * k * p_.L()));
  return s;
}

cplx KernelImages::decaying_state(const InitialState& psi0, double x, double t, double* err) const {
  if (!(t > 0.0)) throw DomainError("decaying_state needs t > 0");
  const double L = p_.L(), q = -p_.phi() / L, alpha = 1.0 / (4.0 * t);
  cplx sum = 0.0;
  double mag = 0.0;
  for (int m = m_min_; m <= m_max_; ++m) {
    const double y0 = x + m * L;
    const cplx a = F1(m), b = F2(m);
    if (a != 0.0) {
      const cplx v = a * psi0.chirp_integral(q, alpha, y0);
      sum += v;
      mag += std::abs(v);
    }
    if (b != 0.0) {
      const cplx v = b * psi0.chirp_integral(q, alpha, -y0);
      sum += v;
      mag += std::abs(v);
    }
  }
  const double pre_abs = std::sqrt(kPi / t);
  const cplx pre = pre_abs * std::polar(1.0, -kPi / 4.0);  // sqrt(pi / (i t))
  if (err) {
    // |chirp| <= int |psi0| <= sqrt(L) for a normalized state
    *err = pre_abs * (dropped_ * std::sqrt(L) + 16.0 * std::numeric_limits<double>::epsilon() * mag);
  }
  return std::exp(1i * (p_.phi() * x / L)) * pre * sum;
}

}  // namespace escape
