#include "scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "escape/parallel.hpp"
#include "output.hpp"

#ifndef ESCAPE_VERSION
#define ESCAPE_VERSION "dev"
#endif

namespace escape::cli {

using nlohmann::ordered_json;

namespace {

std::string join_problems(const std::vector<std::string>& p) {
  std::string s = "invalid configuration:";
  for (const auto& e : p) s += "\n  - " + e;
  return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : DomainError(join_problems(problems)), problems_(std::move(problems)) {}

std::string to_string(ScenarioType t) {
  switch (t) {
    case ScenarioType::Nonescape: return "nonescape";
    case ScenarioType::FiniteLead: return "finite-lead";
    case ScenarioType::Coefficients: return "coefficients";
  }
  return "?";
}

InitialState StateSpec::build(double L) const {
  if (kind == "loop-bound") return InitialState::loop_bound(n, L);
  if (kind == "sin-squared") return InitialState::sin_squared(L);
  if (kind == "superposition") return InitialState::superposition(terms, L);
  if (kind == "sampled") return InitialState::sampled(samples, L);
  throw DomainError("unknown state kind '" + kind + "'");
}

ordered_json StateSpec::to_json() const {
  ordered_json j;
  if (!label.empty()) j["label"] = label;
  j["kind"] = kind;
  if (kind == "loop-bound") j["n"] = n;
  if (kind == "superposition") {
    j["terms"] = ordered_json::array();
    for (const auto& [c, m] : terms) j["terms"].push_back({{"n", m}, {"re", c.real()}, {"im", c.imag()}});
  }
  if (kind == "sampled") {
    std::vector<double> re, im;
    for (const auto& v : samples) {
      re.push_back(v.real());
      im.push_back(v.imag());
    }
    j["re"] = re;
    j["im"] = im;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Reader {
 public:
  std::vector<std::string> errors;

  void keys(const YAML::Node& n, const std::string& path, const std::set<std::string>& allowed) {
    if (!n.IsMap()) {
      errors.push_back(where(path) + "expected a mapping");
      return;
    }
    for (const auto& kv : n) {
      const auto k = kv.first.as<std::string>();
      if (!allowed.count(k)) errors.push_back(where(path) + "unknown key '" + k + "'");
    }
  }

  template <class T>
  bool get(const YAML::Node& n, const std::string& key, const std::string& path, T& out) {
    if (!n.IsMap() || !n[key]) return false;
    try {
      out = n[key].as<T>();
      return true;
    } catch (const YAML::Exception&) {
      errors.push_back(where(path) + "'" + key + "' has the wrong type");
      return false;
    }
  }

  static std::string where(const std::string& path) { return path.empty() ? "" : path + ": "; }
};

bool valid_label(const std::string& s) {
  static const std::regex re(R"(^[A-Za-z0-9_.\-]+$)");
  return std::regex_match(s, re);
}

void check_epsilon(Reader& r, double eps, const std::string& path) {
  if (eps == 0.0)
    r.errors.push_back(Reader::where(path) + "epsilon = 0 is the uncoupled case, which is excluded");
  else if (!(eps > 0.0 && eps <= 0.5))
    r.errors.push_back(Reader::where(path) + "epsilon must lie in (0, 1/2], got " + format_double(eps));
}

StateSpec read_state(Reader& r, const YAML::Node& n, const std::string& path, bool with_label) {
  StateSpec s;
  std::set<std::string> allowed{"kind", "n", "terms", "re", "im"};
  if (with_label) allowed.insert("label");
  r.keys(n, path, allowed);
  if (!n.IsMap()) return s;
  if (with_label && !r.get(n, "label", path, s.label)) r.errors.push_back(Reader::where(path) + "missing 'label'");
  if (!r.get(n, "kind", path, s.kind)) r.errors.push_back(Reader::where(path) + "missing 'kind'");
  if (s.kind == "loop-bound") {
    if (!r.get(n, "n", path, s.n)) r.errors.push_back(Reader::where(path) + "loop-bound state needs 'n'");
    else if (s.n < 1) r.errors.push_back(Reader::where(path) + "loop bound state index must be >= 1");
  } else if (s.kind == "superposition") {
    const auto t = n["terms"];
    if (!t || !t.IsSequence() || t.size() == 0) {
      r.errors.push_back(Reader::where(path) + "superposition needs a non-empty 'terms' list");
    } else {
      double total = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const std::string p = path + ".terms[" + std::to_string(i) + "]";
        r.keys(t[i], p, {"n", "re", "im"});
        int m = 0;
        double re = 0.0, im = 0.0;
        if (!r.get(t[i], "n", p, m) || m < 1) r.errors.push_back(p + ": needs 'n' >= 1");
        r.get(t[i], "re", p, re);
        r.get(t[i], "im", p, im);
        total += re * re + im * im;
        s.terms.push_back({cplx(re, im), m});
      }
      if (!(total > 0.0)) r.errors.push_back(Reader::where(path) + "superposition weights are all zero");
    }
  } else if (s.kind == "sampled") {
    std::vector<double> re, im;
    if (!r.get(n, "re", path, re)) r.errors.push_back(Reader::where(path) + "sampled state needs a 're' list");
    r.get(n, "im", path, im);
    if (!im.empty() && im.size() != re.size())
      r.errors.push_back(Reader::where(path) + "'re' and 'im' must have equal length");
    if (re.size() < 5) r.errors.push_back(Reader::where(path) + "sampled state needs at least 5 values");
    for (std::size_t i = 0; i < re.size(); ++i) s.samples.emplace_back(re[i], im.empty() ? 0.0 : im[i]);
  } else if (s.kind != "sin-squared" && !s.kind.empty()) {
    r.errors.push_back(Reader::where(path) + "unknown state kind '" + s.kind +
                       "' (loop-bound, sin-squared, superposition, sampled)");
  }
  if (s.kind != "loop-bound" && n["n"]) r.errors.push_back(Reader::where(path) + "'n' only applies to loop-bound");
  return s;
}

double read_flux(Reader& r, const std::string& text, const std::string& path) {
  try {
    return parse_flux(text);
  } catch (const DomainError& e) {
    r.errors.push_back(Reader::where(path) + e.what());
    return 0.0;
  }
}

void read_times(Reader& r, const YAML::Node& n, TimeGrid& g) {
  if (!n) return;
  r.keys(n, "times", {"t_min", "t_max", "per_decade"});
  r.get(n, "t_min", "times", g.t_min);
  r.get(n, "t_max", "times", g.t_max);
  r.get(n, "per_decade", "times", g.per_decade);
}

void check_times(Reader& r, const TimeGrid& g) {
  if (!(g.t_min > 0.0 && g.t_max > g.t_min)) r.errors.push_back("times: need 0 < t_min < t_max");
  if (g.per_decade < 1) r.errors.push_back("times: per_decade must be >= 1");
}

void read_solver(Reader& r, const YAML::Node& n, NonescapeOptions& o) {
  if (!n) return;
  r.keys(n, "solver", {"method", "rel_tol", "abs_tol", "cutoff", "max_refinements"});
  std::string m;
  if (r.get(n, "method", "solver", m)) {
    try {
      o.method = parse_method(m);
    } catch (const DomainError& e) {
      r.errors.push_back(std::string("solver: ") + e.what());
    }
  }
  r.get(n, "rel_tol", "solver", o.rel_tol);
  r.get(n, "abs_tol", "solver", o.abs_tol);
  r.get(n, "cutoff", "solver", o.cutoff);
  r.get(n, "max_refinements", "solver", o.max_refinements);
  if (!(o.rel_tol > 0.0)) r.errors.push_back("solver: rel_tol must be > 0");
  if (!(o.abs_tol >= 0.0)) r.errors.push_back("solver: abs_tol must be >= 0");
  if (!(o.cutoff >= 0.0)) r.errors.push_back("solver: cutoff must be >= 0");
  if (o.max_refinements < 1) r.errors.push_back("solver: max_refinements must be >= 1");
}

void read_lead(Reader& r, const YAML::Node& n, FiniteLeadConfig& c) {
  if (!n) return;
  r.keys(n, "lead", {"ell", "n_modes", "dx", "dt", "t_final", "record_every", "max_drift", "kick"});
  r.get(n, "ell", "lead", c.ell);
  r.get(n, "n_modes", "lead", c.n_modes);
  r.get(n, "dx", "lead", c.dx);
  r.get(n, "dt", "lead", c.dt);
  r.get(n, "t_final", "lead", c.t_final);
  r.get(n, "record_every", "lead", c.record_every);
  r.get(n, "max_drift", "lead", c.max_drift);
  std::string k;
  if (r.get(n, "kick", "lead", k)) {
    try {
      c.kick = parse_kick_mode(k);
    } catch (const DomainError& e) {
      r.errors.push_back(std::string("lead: ") + e.what());
    }
  }
}

std::string flux_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ScenarioConfig validate_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError({std::string("YAML syntax: ") + e.what()});
  }
  Reader r;
  ScenarioConfig c;
  r.keys(root, "", {"name", "description", "type", "L", "output", "times", "solver", "curves", "lead", "state",
                    "infinite_reference", "table"});
  if (!root.IsMap()) throw ConfigError(r.errors);

  if (!r.get(root, "name", "", c.name)) r.errors.push_back("missing 'name'");
  else if (!valid_label(c.name)) r.errors.push_back("name may only contain letters, digits, '_', '-' and '.'");
  r.get(root, "description", "", c.description);
  std::string type = "nonescape";
  r.get(root, "type", "", type);
  if (type == "nonescape") c.type = ScenarioType::Nonescape;
  else if (type == "finite-lead") c.type = ScenarioType::FiniteLead;
  else if (type == "coefficients") c.type = ScenarioType::Coefficients;
  else r.errors.push_back("unknown type '" + type + "' (nonescape, finite-lead, coefficients)");
  r.get(root, "L", "", c.L);
  if (!(c.L > 0.0) || !std::isfinite(c.L)) r.errors.push_back("L must be a positive number");
  if (const auto o = root["output"]) {
    r.keys(o, "output", {"dir"});
    r.get(o, "dir", "output", c.output_dir);
  }
  read_times(r, root["times"], c.times);
  read_solver(r, root["solver"], c.solver);

  auto forbid = [&](const char* key) {
    if (root[key]) r.errors.push_back(std::string("'") + key + "' does not apply to type " + type);
  };

  if (c.type == ScenarioType::Nonescape) {
    forbid("lead");
    forbid("state");
    forbid("infinite_reference");
    forbid("table");
    check_times(r, c.times);
    const auto cv = root["curves"];
    if (!cv || !cv.IsSequence() || cv.size() == 0) r.errors.push_back("nonescape scenario needs a non-empty 'curves' list");
    std::set<std::string> labels;
    for (std::size_t i = 0; cv && cv.IsSequence() && i < cv.size(); ++i) {
      const std::string p = "curves[" + std::to_string(i) + "]";
      r.keys(cv[i], p, {"label", "phi", "epsilon", "state", "subtract_p_inf"});
      CurveSpec s;
      if (!r.get(cv[i], "label", p, s.label)) r.errors.push_back(p + ": missing 'label'");
      else if (!valid_label(s.label)) r.errors.push_back(p + ": label may only contain letters, digits, '_', '-' and '.'");
      else if (!labels.insert(s.label).second) r.errors.push_back(p + ": duplicate label '" + s.label + "'");
      r.get(cv[i], "phi", p, s.phi_text);
      s.phi = read_flux(r, s.phi_text, p);
      r.get(cv[i], "epsilon", p, s.epsilon);
      check_epsilon(r, s.epsilon, p);
      r.get(cv[i], "subtract_p_inf", p, s.subtract_p_inf);
      if (!cv[i]["state"]) r.errors.push_back(p + ": missing 'state'");
      else s.state = read_state(r, cv[i]["state"], p + ".state", false);
      c.curves.push_back(s);
    }
  } else if (c.type == ScenarioType::FiniteLead) {
    forbid("solver");
    forbid("table");
    c.lead.L = c.L;
    read_lead(r, root["lead"], c.lead);
    try {
      c.lead.validate();
    } catch (const DomainError& e) {
      std::istringstream in(e.what());
      std::string line;
      std::getline(in, line);  // headline
      while (std::getline(in, line)) r.errors.push_back("lead: " + line.substr(line.find("- ") + 2));
    }
    r.get(root, "infinite_reference", "", c.infinite_reference);
    if (c.infinite_reference) check_times(r, c.times);
    if (!root["state"]) r.errors.push_back("finite-lead scenario needs a 'state'");
    else c.lead_state = read_state(r, root["state"], "state", false);
    const auto cv = root["curves"];
    if (!cv || !cv.IsSequence() || cv.size() == 0) r.errors.push_back("finite-lead scenario needs a non-empty 'curves' list");
    std::set<std::string> labels;
    for (std::size_t i = 0; cv && cv.IsSequence() && i < cv.size(); ++i) {
      const std::string p = "curves[" + std::to_string(i) + "]";
      r.keys(cv[i], p, {"label", "lambda"});
      CurveSpec s;
      s.epsilon = 4.0 / 9.0;
      if (!r.get(cv[i], "label", p, s.label)) r.errors.push_back(p + ": missing 'label'");
      else if (!valid_label(s.label)) r.errors.push_back(p + ": label may only contain letters, digits, '_', '-' and '.'");
      else if (!labels.insert(s.label).second) r.errors.push_back(p + ": duplicate label '" + s.label + "'");
      if (!r.get(cv[i], "lambda", p, s.lambda)) r.errors.push_back(p + ": missing 'lambda'");
      else if (!std::isfinite(s.lambda)) r.errors.push_back(p + ": lambda must be finite");
      c.curves.push_back(s);
    }
  } else if (c.type == ScenarioType::Coefficients) {
    forbid("lead");
    forbid("state");
    forbid("curves");
    forbid("infinite_reference");
    forbid("times");
    forbid("solver");
    const auto t = root["table"];
    if (!t) {
      r.errors.push_back("coefficients scenario needs a 'table' section");
    } else {
      r.keys(t, "table", {"states", "phi", "phi_range", "epsilon"});
      const auto st = t["states"];
      if (!st || !st.IsSequence() || st.size() == 0) r.errors.push_back("table: needs a non-empty 'states' list");
      for (std::size_t i = 0; st && st.IsSequence() && i < st.size(); ++i)
        c.table_states.push_back(read_state(r, st[i], "table.states[" + std::to_string(i) + "]", true));
      std::vector<std::string> phis;
      r.get(t, "phi", "table", phis);
      if (const auto pr = t["phi_range"]) {
        r.keys(pr, "table.phi_range", {"from", "to", "count"});
        double from = 0.0, to = 0.0;
        int count = 0;
        r.get(pr, "from", "table.phi_range", from);
        r.get(pr, "to", "table.phi_range", to);
        r.get(pr, "count", "table.phi_range", count);
        if (count < 2 || !(to > from)) r.errors.push_back("table.phi_range: need from < to and count >= 2");
        else
          for (int i = 0; i < count; ++i) phis.push_back(flux_text(from + (to - from) * i / (count - 1)));
      }
      for (std::size_t i = 0; i < phis.size(); ++i) {
        c.phi_texts.push_back(phis[i]);
        c.phis.push_back(read_flux(r, phis[i], "table.phi[" + std::to_string(i) + "]"));
      }
      if (c.phis.empty()) r.errors.push_back("table: needs 'phi' and/or 'phi_range'");
      r.get(t, "epsilon", "table", c.epsilons);
      if (c.epsilons.empty()) r.errors.push_back("table: needs a non-empty 'epsilon' list");
      for (std::size_t i = 0; i < c.epsilons.size(); ++i)
        check_epsilon(r, c.epsilons[i], "table.epsilon[" + std::to_string(i) + "]");
    }
  }
  if (!r.errors.empty()) throw ConfigError(r.errors);
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return validate_config(ss.str());
}

ordered_json to_json(const ScenarioConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["description"] = c.description;
  j["type"] = to_string(c.type);
  j["L"] = c.L;
  if (!c.output_dir.empty()) j["output"] = {{"dir", c.output_dir}};
  auto times = [&] {
    return ordered_json{{"t_min", c.times.t_min}, {"t_max", c.times.t_max}, {"per_decade", c.times.per_decade}};
  };
  switch (c.type) {
    case ScenarioType::Nonescape: {
      j["times"] = times();
      j["solver"] = {{"method", to_string(c.solver.method)},
                     {"rel_tol", c.solver.rel_tol},
                     {"abs_tol", c.solver.abs_tol},
                     {"cutoff", c.solver.cutoff},
                     {"max_refinements", c.solver.max_refinements}};
      j["curves"] = ordered_json::array();
      for (const auto& s : c.curves)
        j["curves"].push_back({{"label", s.label},
                               {"phi", s.phi_text},
                               {"epsilon", s.epsilon},
                               {"state", s.state.to_json()},
                               {"subtract_p_inf", s.subtract_p_inf}});
      break;
    }
    case ScenarioType::FiniteLead: {
      j["lead"] = {{"ell", c.lead.ell},           {"n_modes", c.lead.n_modes},
                   {"dx", c.lead.dx},             {"dt", c.lead.dt},
                   {"t_final", c.lead.t_final},   {"record_every", c.lead.record_every},
                   {"max_drift", c.lead.max_drift}, {"kick", to_string(c.lead.kick)}};
      j["state"] = c.lead_state.to_json();
      j["infinite_reference"] = c.infinite_reference;
      if (c.infinite_reference) j["times"] = times();
      j["curves"] = ordered_json::array();
      for (const auto& s : c.curves) j["curves"].push_back({{"label", s.label}, {"lambda", s.lambda}});
      break;
    }
    case ScenarioType::Coefficients: {
      ordered_json t;
      t["states"] = ordered_json::array();
      for (const auto& s : c.table_states) t["states"].push_back(s.to_json());
      t["phi"] = c.phi_texts;
      t["epsilon"] = c.epsilons;
      j["table"] = t;
      break;
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// Running

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

ordered_json report_json(const DecayReport& d) {
  return {{"p_infinity", d.p_infinity}, {"delta", d.delta}, {"c_delta", d.c_delta}, {"c1", d.c1},
          {"c3", d.c3},                 {"higher_order", d.higher_order}, {"note", d.note}};
}

[[noreturn]] void rethrow_with_context(const ConvergenceError& e, const std::string& scenario,
                                       const std::string& curve) {
  // e.what() already carries the diagnostics text
  throw ConvergenceError("scenario '" + scenario + "', curve '" + curve + "': " + e.what());
}

void run_nonescape(const ScenarioConfig& c, const std::filesystem::path& dir, RunResult& out) {
  const double L2 = c.L * c.L;
  const auto times = log_time_grid(c.times.t_min * L2, c.times.t_max * L2, c.times.per_decade);
  const std::size_t nt = times.size(), nc = c.curves.size();

  std::vector<std::unique_ptr<NonescapeSolver>> solvers;
  for (const auto& s : c.curves) {
    try {
      solvers.push_back(std::make_unique<NonescapeSolver>(SystemParams(c.L, s.phi, s.epsilon), s.state.build(c.L),
                                                          c.solver));
    } catch (const DomainError& e) {
      throw ConfigError({"curve '" + s.label + "': " + e.what()});
    }
  }
  std::vector<NonescapeValue> vals(nt * nc);
  std::vector<std::string> failure(nc);
  parallel_for(nt * nc, [&](std::size_t idx) {
    const std::size_t ci = idx / nt, ti = idx % nt;
    try {
      vals[idx] = (*solvers[ci])(times[ti]);
    } catch (const ConvergenceError& e) {
      rethrow_with_context(e, c.name, c.curves[ci].label);
    }
  });

  std::vector<PlotCurve> plots;
  std::string report = "label,phi,epsilon,P_inf,delta,C_delta,C1,C3,fit_delta,fit_C,note\n";
  out.manifest["curves"] = ordered_json::array();
  bool any_subtract = false;
  for (std::size_t ci = 0; ci < nc; ++ci) {
    const auto& s = c.curves[ci];
    const auto& solver = *solvers[ci];
    std::vector<double> P(nt), dP(nt), err(nt);
    double max_err = 0.0;
    for (std::size_t ti = 0; ti < nt; ++ti) {
      const auto& v = vals[ci * nt + ti];
      P[ti] = v.p;
      dP[ti] = v.p_decay;
      err[ti] = v.error;
      max_err = std::max(max_err, v.error);
    }
    const std::string file = s.label + ".csv";
    if (s.subtract_p_inf) {
      any_subtract = true;
      write_atomic((dir / file).string(), format_csv({"t", "P", "P_minus_P_inf", "est_error"}, {times, P, dP, err}));
      plots.push_back({file, s.label, 3});
    } else {
      write_atomic((dir / file).string(), format_csv({"t", "P", "est_error"}, {times, P, err}));
      plots.push_back({file, s.label, 2});
    }
    out.files.push_back(file);

    const DecayReport d = decay_report(solver.params(), solver.state());
    ordered_json cj{{"label", s.label},
                    {"file", file},
                    {"points", nt},
                    {"method", to_string(solver.method())},
                    {"max_est_error", max_err},
                    {"decay", report_json(d)}};
    std::string fit_delta = "", fit_c = "";
    if (d.delta > 0) {
      TimeSeries ts{times, P, err, "quadrature"};
      try {
        const auto f = power_law_fit(ts, d.p_infinity);
        cj["tail_fit"] = {{"delta", f.delta}, {"c", f.c}, {"points", f.points}, {"rms_log_residual", f.rms_residual}};
        if (std::abs(f.delta - d.delta) > 0.1)
          cj["tail_fit"]["note"] = "fit window not yet in the asymptotic regime (slow resonance); extend times.t_max";
        fit_delta = format_double(f.delta);
        fit_c = format_double(f.c);
      } catch (const ConvergenceError& e) {
        cj["tail_fit"] = {{"error", e.what()}};
      }
    }
    out.manifest["curves"].push_back(cj);
    report += csv_field(s.label) + "," + format_double(s.phi) + "," + format_double(s.epsilon) + "," +
              format_double(d.p_infinity) + "," + std::to_string(d.delta) + "," + format_double(d.c_delta) + "," +
              format_double(d.c1) + "," + format_double(d.c3) + "," + fit_delta + "," + fit_c + "," +
              csv_field(d.note) + "\n";
  }
  write_atomic((dir / "report.csv").string(), report);
  out.files.push_back("report.csv");
  write_atomic((dir / "plot.gp").string(),
               gnuplot_script(c.name, any_subtract ? "P(t) - P_inf" : "P(t)", plots));
  out.files.push_back("plot.gp");
}

void run_finite_lead(const ScenarioConfig& c, const std::filesystem::path& dir, RunResult& out) {
  const InitialState psi0 = c.lead_state.build(c.L);
  const LeadBasis basis(c.lead);
  const std::size_t nc = c.curves.size();
  std::vector<EvolutionResult> res(nc);
  parallel_for(nc, [&](std::size_t i) {
    try {
      res[i] = evolve(basis, psi0, c.lead.t_final, c.curves[i].lambda);
    } catch (const ConvergenceError& e) {
      rethrow_with_context(e, c.name, c.curves[i].label);
    }
  });
  std::vector<PlotCurve> plots;
  out.manifest["curves"] = ordered_json::array();
  for (std::size_t i = 0; i < nc; ++i) {
    const auto& s = res[i].series;
    const std::string file = c.curves[i].label + ".csv";
    write_atomic((dir / file).string(), format_csv({"t", "P", "est_error"}, {s.times, s.values, s.errors}));
    out.files.push_back(file);
    plots.push_back({file, c.curves[i].label, 2});
    out.manifest["curves"].push_back({{"label", c.curves[i].label},
                                      {"file", file},
                                      {"lambda", c.curves[i].lambda},
                                      {"method", s.method},
                                      {"points", s.times.size()},
                                      {"steps", res[i].steps},
                                      {"max_norm_drift", res[i].max_drift},
                                      {"parseval_defect", res[i].parseval_defect}});
  }
  out.manifest["basis"] = {{"modes", basis.modes().size()},
                           {"k_max", basis.modes().back().k},
                           {"grid_points", basis.table().cols()}};
  if (c.infinite_reference) {
    const double t_hi = std::min(c.times.t_max * c.L * c.L, c.lead.t_final);
    const double t_lo = c.times.t_min * c.L * c.L;
    if (t_hi > t_lo) {
      TimeSeries ref;
      try {
        ref = nonescape_series(SystemParams(c.L, 0.0, 4.0 / 9.0), psi0, log_time_grid(t_lo, t_hi, c.times.per_decade));
      } catch (const ConvergenceError& e) {
        rethrow_with_context(e, c.name, "infinite_lead");
      }
      const std::string file = "infinite_lead.csv";
      write_atomic((dir / file).string(), format_csv({"t", "P", "est_error"}, {ref.times, ref.values, ref.errors}));
      out.files.push_back(file);
      plots.push_back({file, "infinite lead, lambda = 0", 2});
      out.manifest["curves"].push_back(
          {{"label", "infinite_lead"}, {"file", file}, {"lambda", 0.0}, {"method", ref.method}, {"points", ref.times.size()}});
    }
  }
  write_atomic((dir / "plot.gp").string(), gnuplot_script(c.name, "P(t)", plots));
  out.files.push_back("plot.gp");
}

void run_coefficients(const ScenarioConfig& c, const std::filesystem::path& dir, RunResult& out) {
  std::string csv = "state,phi,epsilon,P_inf,delta,C_delta,C1,C3,C_closed_form,note\n";
  std::size_t rows = 0;
  for (const auto& st : c.table_states) {
    InitialState psi0 = [&] {
      try {
        return st.build(c.L);
      } catch (const DomainError& e) {
        throw ConfigError({"state '" + st.label + "': " + e.what()});
      }
    }();
    for (double eps : c.epsilons)
      for (std::size_t i = 0; i < c.phis.size(); ++i) {
        const SystemParams p(c.L, c.phis[i], eps);
        const DecayReport d = decay_report(p, psi0);
        // closed forms exist for single loop bound states
        double closed = std::nan("");
        if (st.kind == "loop-bound") {
          try {
            closed = d.delta == 1 ? c1_bound_state(p, st.n) : d.delta == 3 ? c3_bound_state(p, st.n) : 0.0;
          } catch (const DomainError&) {
          }
        }
        csv += csv_field(st.label) + "," + format_double(c.phis[i]) + "," + format_double(eps) + "," +
               format_double(d.p_infinity) + "," + std::to_string(d.delta) + "," + format_double(d.c_delta) + "," +
               format_double(d.c1) + "," + format_double(d.c3) + "," + format_double(closed) + "," +
               csv_field(d.note) + "\n";
        ++rows;
      }
  }
  write_atomic((dir / "coefficients.csv").string(), csv);
  out.files.push_back("coefficients.csv");
  out.manifest["rows"] = rows;
  std::string gp = "# gnuplot script; run with: gnuplot -persist plot.gp\n"
                   "set datafile separator ','\nset key autotitle columnhead\n"
                   "set title '" + c.name + "'\nset xlabel 'Phi'\nset ylabel 'C_delta'\nset logscale y\n"
                   "plot 'coefficients.csv' using 2:($6 > 0 ? $6 : 1/0) with points title 'C_delta'\n";
  write_atomic((dir / "plot.gp").string(), gp);
  out.files.push_back("plot.gp");
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& c, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult out;
  out.out_dir = out_dir;
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  out.manifest["name"] = c.name;
  out.manifest["description"] = c.description;
  out.manifest["type"] = to_string(c.type);
  out.manifest["software"] = {{"name", "escape"}, {"version", ESCAPE_VERSION}};
  out.manifest["config"] = to_json(c);
  out.manifest["threads"] = thread_count();
  if (c.type == ScenarioType::Nonescape)
    out.manifest["time_grid_note"] =
        "log-spaced grid in units of L^2; the axis ranges of the reference figures are implicit, so this range is a choice";

  switch (c.type) {
    case ScenarioType::Nonescape: run_nonescape(c, dir, out); break;
    case ScenarioType::FiniteLead: run_finite_lead(c, dir, out); break;
    case ScenarioType::Coefficients: run_coefficients(c, dir, out); break;
  }
  out.manifest["files"] = out.files;
  out.manifest["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_atomic((dir / "manifest.json").string(), out.manifest.dump(2) + "\n");
  out.files.push_back("manifest.json");
  return out;
}

}  // namespace escape::cli
