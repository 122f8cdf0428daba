#include "escape/finite_lead.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "escape/errors.hpp"
#include "escape/quadrature.hpp"

namespace escape {

namespace {

bool near_integer(double v, double tol = 1e-9) { return std::abs(v - std::round(v)) <= tol * std::max(1.0, std::abs(v)); }

}  // namespace

FiniteLeadConfig FiniteLeadConfig::desk() { return {}; }

FiniteLeadConfig FiniteLeadConfig::full() {
  FiniteLeadConfig c;
  c.ell = 500.0;
  c.n_modes = 2500;
  c.t_final = 100.0;
  return c;
}

void FiniteLeadConfig::validate() const {
  std::vector<std::string> errs;
  if (!(L > 0.0)) errs.push_back("L must be > 0");
  if (!(ell > L)) errs.push_back("ell must exceed L");
  else if (!near_integer(ell / L)) errs.push_back("ell / L must be an integer");
  if (n_modes < 1) errs.push_back("n_modes must be >= 1");
  if (!(dx > 0.0)) errs.push_back("dx must be > 0");
  else if (L > 0.0 && (!near_integer(L / dx) || std::lround(L / dx) % 2 != 0))
    errs.push_back("L / dx must be an even integer (Simpson grid with a node at x = L)");
  if (!(dt > 0.0)) errs.push_back("dt must be > 0");
  if (!std::isfinite(lambda)) errs.push_back("lambda must be finite");
  if (!(t_final >= 0.0)) errs.push_back("t_final must be >= 0");
  if (record_every < 1) errs.push_back("record_every must be >= 1");
  if (!(max_drift > 0.0)) errs.push_back("max_drift must be > 0");
  if (errs.empty()) return;
  std::ostringstream os;
  os << "invalid finite-lead configuration:";
  for (const auto& e : errs) os << "\n  - " << e;
  throw DomainError(os.str());
}

int FiniteLeadConfig::ell_ratio() const { return static_cast<int>(std::lround(ell / L)); }
int FiniteLeadConfig::loop_intervals() const { return static_cast<int>(std::lround(L / dx)); }
int FiniteLeadConfig::grid_intervals() const { return loop_intervals() * (1 + ell_ratio()); }

std::string to_string(Branch b) {
  switch (b) {
    case Branch::Regular: return "regular";
    case Branch::SigmaLeft: return "sigma_left";
    case Branch::SigmaCenter: return "sigma_center";
    case Branch::SigmaRight: return "sigma_right";
  }
  return "?";
}

std::string to_string(KickMode k) { return k == KickMode::Grid ? "grid" : "galerkin"; }

KickMode parse_kick_mode(const std::string& s) {
  if (s == "grid") return KickMode::Grid;
  if (s == "galerkin") return KickMode::Galerkin;
  throw DomainError("unknown kick mode '" + s + "' (grid, galerkin)");
}

bool in_sigma(const FiniteLeadConfig& cfg, int n) { return n >= 1 && n % (2 * cfg.ell_ratio()) == 0; }

std::vector<Branch> branches(const FiniteLeadConfig& cfg, int n) {
  if (in_sigma(cfg, n)) return {Branch::SigmaLeft, Branch::SigmaCenter, Branch::SigmaRight};
  return {Branch::Regular};
}

FixedPoint fixed_point_delta(const FiniteLeadConfig& cfg, int n, Branch branch) {
  if (n < 0) throw DomainError("mode index must be >= 0");
  const bool sigma = in_sigma(cfg, n);
  if (sigma == (branch == Branch::Regular))
    throw DomainError("branch " + to_string(branch) + " does not exist for n = " + std::to_string(n));
  FixedPoint fp;
  fp.branch = branch;
  if (branch == Branch::SigmaCenter) {
    fp.iterates = {0.0};
    return fp;
  }
  const double ell = cfg.ell, L = cfg.L, edge = kPi / (2.0 * ell);
  const int q = cfg.ell_ratio();
  // theta reduced mod 2 pi before adding delta L, so large n keep their digits
  const double base = (n % (2 * q)) * kPi / q;
  double lo = -edge, hi = edge, seed = 0.0, at_zero = 0.0;
  if (n == 0) {
    lo = 0.0;
    seed = kPi / (4.0 * ell);
    at_zero = edge;
  } else if (branch == Branch::SigmaLeft) {
    hi = 0.0;
    seed = -kPi / (4.0 * ell);
    at_zero = -edge;
  } else if (branch == Branch::SigmaRight) {
    lo = 0.0;
    seed = kPi / (4.0 * ell);
    at_zero = edge;
  }
  auto F = [&](double d) {
    double s = std::sin(0.5 * (base + d * L)), c = std::cos(0.5 * (base + d * L));
    if (s == 0.0) return at_zero;
    if (s < 0.0) {
      s = -s;
      c = -c;
    }
    return std::atan2(0.5 * c, s) / ell;
  };
  double d = seed;
  fp.iterates.push_back(d);
  for (int it = 0; it < 200; ++it) {
    const double next = F(d);
    if (next < lo - 1e-15 || next > hi + 1e-15)
      throw std::logic_error("fixed-point iterate left its interval (n = " + std::to_string(n) + ")");
    fp.iterates.push_back(next);
    if (std::abs(next - d) < 1e-14) {
      fp.delta = next;
      return fp;
    }
    d = next;
  }
  throw ConvergenceError("fixed-point iteration did not settle", {{"n", double(n)}, {"last", d}});
}

double mode_normalization(double k, double L, double ell) {
  const double ckL = std::cos(k * L), skL = std::sin(k * L);
  const double sl = std::sin(k * ell), cl = std::cos(k * ell);
  const double v = 2.0 * L + ell * (5.0 - 3.0 * ckL) + 2.0 * skL * (1.0 - 2.0 * sl * sl) / k +
                   sl * cl * (5.0 * ckL - 3.0) / k;
  return 1.0 / std::sqrt(v);
}

double transcendental_residual(double k, double L, double ell) {
  const double rhs = std::sin(k * L) / (1.0 - std::cos(k * L));
  return std::abs(2.0 * std::tan(k * ell) - rhs) / (1.0 + std::abs(rhs));
}

double EigenMode::value(double x, double L) const {
  if (branch == Branch::SigmaCenter) return x >= 0.0 && x < L ? norm * std::sin(k * x) : 0.0;
  if (x < L) return 2.0 * norm * std::cos(k * (x - 0.5 * L));
  const double u = x - L;
  return norm * (2.0 * std::cos(0.5 * k * L) * std::cos(k * u) - 4.0 * std::sin(0.5 * k * L) * std::sin(k * u));
}

double EigenMode::derivative(double x, double L) const {
  if (branch == Branch::SigmaCenter) return x >= 0.0 && x < L ? norm * k * std::cos(k * x) : 0.0;
  if (x < L) return -2.0 * norm * k * std::sin(k * (x - 0.5 * L));
  const double u = x - L;
  return -norm * k * (2.0 * std::cos(0.5 * k * L) * std::sin(k * u) + 4.0 * std::sin(0.5 * k * L) * std::cos(k * u));
}

EigenMode eigenmode(const FiniteLeadConfig& cfg, int n, Branch branch) {
  cfg.validate();
  const FixedPoint fp = fixed_point_delta(cfg, n, branch);
  EigenMode m;
  m.n = n;
  m.branch = branch;
  m.delta = fp.delta;
  if (branch == Branch::SigmaCenter) {
    m.k = 2.0 * kPi * (n / (2 * cfg.ell_ratio())) / cfg.L;
    m.norm = std::sqrt(2.0 / cfg.L);
    return m;
  }
  m.k = n * kPi / cfg.ell + fp.delta;
  m.norm = mode_normalization(m.k, cfg.L, cfg.ell);
  const double wall = std::abs(m.value(cfg.L + cfg.ell, cfg.L));
  if (!(wall < 1e-10))
    throw ConvergenceError("eigenmode misses the wall condition", {{"n", double(n)}, {"residual", wall}});
  return m;
}

std::array<double, 4> lead_boundary_residuals(const EigenMode& m, const FiniteLeadConfig& cfg) {
  const double L = cfg.L;
  const double below = std::nextafter(L, 0.0);
  auto v = [&](double x) { return m.value(x, L); };
  auto d = [&](double x) { return m.derivative(x, L); };
  // The loop mode vanishes on the lead, so its limits at L come from the loop formula.
  const double v_lm = m.branch == Branch::SigmaCenter ? m.norm * std::sin(m.k * L) : v(below);
  const double d_lm = m.branch == Branch::SigmaCenter ? m.norm * m.k * std::cos(m.k * L) : d(below);
  return {std::abs(v(0.0) - v_lm), std::abs(v_lm - v(L)), std::abs(d_lm - d(0.0) - d(L)),
          std::abs(v(L + cfg.ell))};
}

double soft_core_potential(const FiniteLeadConfig& cfg, double x) {
  if (cfg.lambda == 0.0) return 0.0;
  const double R = cfg.L / (2.0 * kPi);
  const double d = x <= cfg.L ? std::sqrt(2.0) * R * std::sqrt(1.0 - std::cos(kPi - x / R)) : 2.0 * R + x - cfg.L;
  return cfg.lambda / std::sqrt(d * d + 1e-4);
}

// ---------------------------------------------------------------------------

LeadBasis::LeadBasis(const FiniteLeadConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  for (int n = 0; static_cast<int>(modes_.size()) < cfg_.n_modes; ++n)
    for (Branch b : branches(cfg_, n)) {
      if (static_cast<int>(modes_.size()) == cfg_.n_modes) break;
      modes_.push_back(eigenmode(cfg_, n, b));
    }
  const int N = cfg_.grid_intervals();
  const Eigen::VectorXd x = grid();
  table_.resize(cfg_.n_modes, N + 1);
  e_.resize(cfg_.n_modes);
  for (int i = 0; i < cfg_.n_modes; ++i) {
    e_[i] = modes_[i].k * modes_[i].k;
    for (int j = 0; j <= N; ++j) table_(i, j) = modes_[i].value(x[j], cfg_.L);
  }
  const auto w = simpson_weights(N + 1, cfg_.dx);
  w_ = Eigen::Map<const Eigen::VectorXd>(w.data(), N + 1);
  const auto wl = simpson_weights(cfg_.loop_intervals() + 1, cfg_.dx);
  w_loop_ = Eigen::Map<const Eigen::VectorXd>(wl.data(), wl.size());
}

Eigen::VectorXd LeadBasis::grid() const {
  const int N = cfg_.grid_intervals();
  return Eigen::VectorXd::LinSpaced(N + 1, 0.0, N * cfg_.dx);
}

Eigen::VectorXcd LeadBasis::project(const Eigen::VectorXcd& psi) const {
  Eigen::MatrixX2d v(psi.size(), 2);
  v.col(0) = w_.cwiseProduct(psi.real());
  v.col(1) = w_.cwiseProduct(psi.imag());
  const Eigen::MatrixX2d c = table_ * v;
  Eigen::VectorXcd out(c.rows());
  out.real() = c.col(0);
  out.imag() = c.col(1);
  return out;
}

Eigen::VectorXcd LeadBasis::synthesize(const Eigen::VectorXcd& c) const {
  Eigen::MatrixX2d v(c.size(), 2);
  v.col(0) = c.real();
  v.col(1) = c.imag();
  const Eigen::MatrixX2d psi = table_.transpose() * v;
  Eigen::VectorXcd out(psi.rows());
  out.real() = psi.col(0);
  out.imag() = psi.col(1);
  return out;
}

Eigen::MatrixXd LeadBasis::gram(int m) const {
  const auto T = table_.topRows(m);
  return T * w_.asDiagonal() * T.transpose();
}

Eigen::MatrixXcd LeadBasis::kick_matrix(const Eigen::VectorXd& potential, double dt, KickMode mode) const {
  if (potential.size() != table_.cols()) throw DomainError("potential table does not match the grid");
  if (mode == KickMode::Galerkin) {
    const Eigen::MatrixXd vnm = table_ * w_.cwiseProduct(potential).asDiagonal() * table_.transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(vnm);
    if (es.info() != Eigen::Success) throw ConvergenceError("eigen-decomposition of the potential matrix failed");
    Eigen::VectorXcd ph(vnm.rows());
    for (Eigen::Index i = 0; i < ph.size(); ++i) ph[i] = std::polar(1.0, -dt * es.eigenvalues()[i]);
    const Eigen::MatrixXcd U = es.eigenvectors().cast<cplx>();
    return U * ph.asDiagonal() * U.transpose();
  }
  Eigen::VectorXd wc(potential.size()), ws(potential.size());
  for (Eigen::Index j = 0; j < potential.size(); ++j) {
    wc[j] = w_[j] * std::cos(dt * potential[j]);
    ws[j] = -w_[j] * std::sin(dt * potential[j]);
  }
  Eigen::MatrixXcd out(table_.rows(), table_.rows());
  out.real() = table_ * wc.asDiagonal() * table_.transpose();
  if (potential.cwiseAbs().maxCoeff() > 0.0)
    out.imag() = table_ * ws.asDiagonal() * table_.transpose();
  else
    out.imag().setZero();
  return out;
}

double LeadBasis::norm2(const Eigen::VectorXcd& psi) const { return w_.dot(psi.cwiseAbs2()); }

double LeadBasis::loop_norm2(const Eigen::VectorXcd& psi) const {
  return w_loop_.dot(psi.head(w_loop_.size()).cwiseAbs2());
}

EvolutionState initial_state_on_grid(const LeadBasis& basis, const InitialState& psi0) {
  const auto& cfg = basis.config();
  if (std::abs(psi0.L() - cfg.L) > 1e-12 * cfg.L) throw DomainError("initial state and lead config disagree on L");
  const Eigen::VectorXd x = basis.grid();
  EvolutionState s;
  s.psi = Eigen::VectorXcd::Zero(x.size());
  for (int j = 0; j < cfg.loop_intervals(); ++j) s.psi[j] = psi0(x[j]);
  s.norm = basis.norm2(s.psi);
  return s;
}

Eigen::VectorXd potential_table(const LeadBasis& basis, double lambda) {
  FiniteLeadConfig cfg = basis.config();
  cfg.lambda = lambda;
  const Eigen::VectorXd x = basis.grid();
  Eigen::VectorXd v(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) v[j] = soft_core_potential(cfg, x[j]);
  return v;
}

StrangStepper::StrangStepper(const LeadBasis& basis, const Eigen::VectorXd& potential, double dt, KickMode mode)
    : basis_(basis), dt_(dt), mode_(mode) {
  if (!(dt > 0.0)) throw DomainError("time step must be > 0");
  if (potential.size() != basis.table().cols()) throw DomainError("potential table does not match the grid");
  half_.resize(potential.size());
  for (Eigen::Index j = 0; j < potential.size(); ++j) half_[j] = std::polar(1.0, -0.5 * dt * potential[j]);
  if (mode == KickMode::Galerkin) half_nm_ = basis.kick_matrix(potential, 0.5 * dt, KickMode::Galerkin);
  kinetic_.resize(basis.energies().size());
  for (Eigen::Index n = 0; n < kinetic_.size(); ++n) kinetic_[n] = std::polar(1.0, -dt * basis.energies()[n]);
}

void StrangStepper::step(EvolutionState& s, double max_step_drift) const {
  if (mode_ == KickMode::Galerkin) {
    const Eigen::VectorXcd c = half_nm_ * kinetic_.cwiseProduct(half_nm_ * basis_.project(s.psi));
    s.psi = basis_.synthesize(c);
  } else {
    const Eigen::VectorXcd c = kinetic_.cwiseProduct(basis_.project(half_.cwiseProduct(s.psi)));
    s.psi = half_.cwiseProduct(basis_.synthesize(c));
  }
  s.t += dt_;
  const double n = basis_.norm2(s.psi);
  if (std::abs(n - s.norm) > max_step_drift)
    throw ConvergenceError("norm jumped in one Strang step", {{"t", s.t}, {"before", s.norm}, {"after", n}});
  s.norm = n;
}

EvolutionState strang_step(const LeadBasis& basis, const EvolutionState& s) {
  const StrangStepper st(basis, potential_table(basis, basis.config().lambda), basis.config().dt, basis.config().kick);
  EvolutionState out = s;
  st.step(out, basis.config().max_drift);
  return out;
}

EvolutionResult evolve(const LeadBasis& basis, const InitialState& psi0, double t_final) {
  return evolve(basis, psi0, t_final, basis.config().lambda);
}

EvolutionResult evolve(const LeadBasis& basis, const InitialState& psi0, double t_final, double lambda) {
  const auto& cfg = basis.config();
  if (!(t_final >= 0.0)) throw DomainError("t_final must be >= 0");
  EvolutionResult r;
  r.series.method = "pseudo-spectral";
  EvolutionState s = initial_state_on_grid(basis, psi0);
  const Eigen::VectorXcd c0 = basis.project(s.psi);
  r.parseval_defect = std::abs(s.norm - c0.squaredNorm());
  s.psi = basis.synthesize(c0);
  const double ref = basis.norm2(s.psi);

  if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
  const Eigen::VectorXd V = potential_table(basis, lambda);
  Eigen::VectorXcd half(V.size()), kin(basis.energies().size());
  for (Eigen::Index j = 0; j < V.size(); ++j) half[j] = std::polar(1.0, -0.5 * cfg.dt * V[j]);
  for (Eigen::Index n = 0; n < kin.size(); ++n) kin[n] = std::polar(1.0, -cfg.dt * basis.energies()[n]);

  const int nl = cfg.loop_intervals() + 1;
  const Eigen::MatrixXcd loop_rows = basis.table().leftCols(nl).transpose().cast<cplx>();
  const Eigen::VectorXcd loop_half = half.head(nl);
  auto record = [&](double t, const Eigen::VectorXcd& loop_psi, double norm) {
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(V.size());
    full.head(nl) = loop_psi;
    r.series.times.push_back(t);
    r.series.values.push_back(basis.loop_norm2(full));
    r.series.errors.push_back(std::abs(norm - ref) / ref + r.parseval_defect);
    r.norms.push_back(norm);
  };
  record(0.0, s.psi.head(nl), ref);

  const int steps = static_cast<int>(std::lround(t_final / cfg.dt));
  if (steps == 0) return r;
  // d holds the coefficients right after the kinetic factor; the state on
  // the grid is the closing half kick applied to F^-1 d.
  const bool galerkin = cfg.kick == KickMode::Galerkin;
  const Eigen::MatrixXcd W = basis.kick_matrix(V, cfg.dt, cfg.kick);
  const Eigen::MatrixXcd W_half = galerkin ? basis.kick_matrix(V, 0.5 * cfg.dt, cfg.kick) : Eigen::MatrixXcd();
  Eigen::VectorXcd d = galerkin ? Eigen::VectorXcd(kin.cwiseProduct(W_half * c0))
                                : Eigen::VectorXcd(kin.cwiseProduct(basis.project(half.cwiseProduct(s.psi))));
  double prev = d.squaredNorm();
  for (int i = 1; i <= steps; ++i) {
    const double norm = d.squaredNorm();
    const double drift = std::abs(norm - ref) / ref;
    if (std::abs(norm - prev) > cfg.max_drift)
      throw ConvergenceError("norm jumped in one Strang step", {{"t", i * cfg.dt}, {"before", prev}, {"after", norm}});
    if (drift > cfg.max_drift)
      throw ConvergenceError("cumulative norm drift exceeds the limit", {{"t", i * cfg.dt}, {"drift", drift}});
    r.max_drift = std::max(r.max_drift, drift);
    prev = norm;
    if (i % cfg.record_every == 0 || i == steps) {
      if (galerkin)
        record(i * cfg.dt, loop_rows * (W_half * d), norm);
      else
        record(i * cfg.dt, loop_half.cwiseProduct(loop_rows * d), norm);
    }
    if (i < steps) d = kin.cwiseProduct(W * d);
  }
  r.steps = steps;
  return r;
}

EvolutionResult evolve(const FiniteLeadConfig& cfg, const InitialState& psi0, double t_final) {
  const LeadBasis basis(cfg);
  return evolve(basis, psi0, t_final);
}

}  // namespace escape
