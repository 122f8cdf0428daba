#pragma once
// Scenario configuration (YAML), validation and the runner that turns one
// scenario into CSV curves, a JSON manifest and a gnuplot script.

#include <string>
#include <vector>

#include "escape/core_model.hpp"
#include "escape/errors.hpp"
#include "escape/finite_lead.hpp"
#include "escape/nonescape.hpp"
#include "json.hpp"

namespace escape::cli {

// Every violated constraint of a configuration, one message per entry.
class ConfigError : public DomainError {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct StateSpec {
  std::string label;                         // coefficient tables only
  std::string kind = "loop-bound";           // loop-bound | sin-squared | superposition | sampled
  int n = 1;                                 // loop-bound
  std::vector<std::pair<cplx, int>> terms;   // superposition (weight, n)
  std::vector<cplx> samples;                 // sampled, equally spaced on [0, L]

  InitialState build(double L) const;
  nlohmann::ordered_json to_json() const;
};

struct CurveSpec {
  std::string label;
  std::string phi_text = "0";
  double phi = 0.0;
  double epsilon = 0.5;
  double lambda = 0.0;  // finite-lead curves
  StateSpec state;
  bool subtract_p_inf = false;
};

struct TimeGrid {
  double t_min = 1e-2;
  double t_max = 1e3;
  int per_decade = 20;
};

enum class ScenarioType { Nonescape, FiniteLead, Coefficients };
std::string to_string(ScenarioType t);

struct ScenarioConfig {
  std::string name;
  std::string description;
  ScenarioType type = ScenarioType::Nonescape;
  double L = 1.0;
  std::string output_dir;  // empty: ./<name>

  // nonescape
  TimeGrid times;  // in units of L^2
  NonescapeOptions solver;
  std::vector<CurveSpec> curves;

  // finite-lead (curves carry lambda; state is shared)
  FiniteLeadConfig lead;
  StateSpec lead_state;
  bool infinite_reference = false;

  // coefficients
  std::vector<StateSpec> table_states;
  std::vector<std::string> phi_texts;
  std::vector<double> phis;
  std::vector<double> epsilons;
};

// Parses and validates; throws ConfigError listing every problem.
ScenarioConfig validate_config(const std::string& yaml_text);
ScenarioConfig load_config(const std::string& path);

// Canonical form; feeding its dump back to validate_config gives the same JSON.
nlohmann::ordered_json to_json(const ScenarioConfig& c);

struct RunResult {
  std::string out_dir;
  std::vector<std::string> files;
  nlohmann::ordered_json manifest;
};

// Runs every curve and writes the artifact set into out_dir (created if
// needed). Numerical failures are rethrown as ConvergenceError carrying the
// scenario and curve names.
RunResult run_scenario(const ScenarioConfig& c, const std::string& out_dir);

}  // namespace escape::cli
