#include "presets.hpp"

#include <sstream>

namespace escape::cli {

namespace {

// All nonescape presets share L = 1 and the default grid t in [1e-2, 1e3] L^2,
// 20 points per decade.
std::string nonescape_header(const std::string& name, const std::string& description) {
  return "name: " + name + "\n" + "description: \"" + description + "\"\n" +
         "type: nonescape\n"
         "L: 1\n"
         "times: {t_min: 1.0e-2, t_max: 1.0e3, per_decade: 20}\n"
         "curves:\n";
}

std::string bound_curve(const std::string& label, const std::string& phi, double eps, int n, bool subtract = false) {
  std::ostringstream os;
  os << "  - label: " << label << "\n"
     << "    phi: \"" << phi << "\"\n"
     << "    epsilon: " << eps << "\n"
     << "    state: {kind: loop-bound, n: " << n << "}\n";
  if (subtract) os << "    subtract_p_inf: true\n";
  return os.str();
}

std::string fig6() {
  std::string s = nonescape_header("fig6", "loop bound states n = 1, 2, 3 at Phi = pi/2, epsilon = 1/2");
  for (int n = 1; n <= 3; ++n) s += bound_curve("n" + std::to_string(n), "pi/2", 0.5, n);
  return s;
}

std::string fig7() {
  std::string s = nonescape_header("fig7", "n = 1, epsilon = 1/2, Phi in {0.1, 0.3, 0.5, 0.7, 1, 2}");
  for (const char* phi : {"0.1", "0.3", "0.5", "0.7", "1", "2"}) s += bound_curve(std::string("phi_") + phi, phi, 0.5, 1);
  return s;
}

std::string fig8() {
  std::string s = nonescape_header("fig8", "n = 1, epsilon = 1/2, Phi in {3, 4, 5, 6}");
  for (const char* phi : {"3", "4", "5", "6"}) s += bound_curve(std::string("phi_") + phi, phi, 0.5, 1);
  return s;
}

std::string fig9() {
  std::string s = nonescape_header("fig9", "P - P_inf for n = 1, epsilon = 1/2, Phi in {pi, 2pi, 3pi, 4pi}");
  for (const char* phi : {"pi", "2pi", "3pi", "4pi"}) s += bound_curve(std::string("phi_") + phi, phi, 0.5, 1, true);
  return s;
}

std::string fig10() {
  std::string s = nonescape_header("fig10", "n = 1, Phi = pi/2, epsilon in {0.3, 0.4, 0.5}");
  for (const char* eps : {"0.3", "0.4", "0.5"}) s += bound_curve(std::string("eps_") + eps, "pi/2", std::stod(eps), 1);
  return s;
}

std::string filter_demo() {
  std::string s = nonescape_header(
      "filter-demo",
      "Phi = 2pi filters bound states: n = 1 decays as 1/t, n = 2 as 1/t^3, and their superposition keeps the 1/t channel");
  s += bound_curve("n1", "2pi", 0.5, 1, true);
  s += bound_curve("n2", "2pi", 0.5, 2, true);
  s += "  - label: superposition\n"
       "    phi: \"2pi\"\n"
       "    epsilon: 0.5\n"
       "    state:\n"
       "      kind: superposition\n"
       "      terms:\n"
       "        - {n: 1, re: 0.70710678118654752, im: 0}\n"
       "        - {n: 2, re: 0.70710678118654752, im: 0}\n"
       "    subtract_p_inf: true\n";
  return s;
}

std::string fig11(bool desk) {
  std::string s;
  if (desk) {
    s = "name: fig11-desk\n"
        "description: \"soft-core potential on a finite lead, desk scale (ell = 50 L, 400 modes); "
        "reflections from the lead end return after t of about 3.5\"\n";
  } else {
    s = "name: fig11\n"
        "description: \"soft-core potential on a finite lead at full size (ell = 500 L, 2500 modes); "
        "long-running job, needs about 0.8 GB and hours of CPU time\"\n";
  }
  s += "type: finite-lead\n"
       "L: 1\n"
       "lead:\n";
  s += desk ? "  ell: 50\n  n_modes: 400\n  t_final: 25\n" : "  ell: 500\n  n_modes: 2500\n  t_final: 100\n";
  s += "  dx: 0.0125\n"
       "  dt: 1.0e-3\n"
       "  record_every: 10\n"
       "  max_drift: 1.0e-3\n"
       "  kick: galerkin\n"
       "state: {kind: sin-squared}\n"
       "infinite_reference: true\n"
       "times: {t_min: 1.0e-2, t_max: 1.0e3, per_decade: 20}\n"
       "curves:\n"
       "  - {label: lambda_m0.1, lambda: -0.1}\n"
       "  - {label: lambda_0, lambda: 0}\n"
       "  - {label: lambda_0.1, lambda: 0.1}\n"
       "  - {label: lambda_1, lambda: 1}\n";
  return s;
}

std::string coefficients() {
  std::string s =
      "name: coefficients\n"
      "description: \"P_inf, delta and C_delta for n = 1, 2, 3 at epsilon = 1/2 on Phi in [0, 100] plus the "
      "multiples of 2pi\"\n"
      "type: coefficients\n"
      "L: 1\n"
      "table:\n"
      "  states:\n"
      "    - {label: n1, kind: loop-bound, n: 1}\n"
      "    - {label: n2, kind: loop-bound, n: 2}\n"
      "    - {label: n3, kind: loop-bound, n: 3}\n"
      "  phi_range: {from: 0, to: 100, count: 2001}\n"
      "  phi: [";
  for (int m = 1; m <= 15; ++m) s += (m > 1 ? ", " : "") + std::string("\"") + std::to_string(2 * m) + "pi\"";
  s += "]\n  epsilon: [0.5]\n";
  return s;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = {
      {"fig6", "bound states n = 1, 2, 3 at Phi = pi/2", fig6()},
      {"fig7", "n = 1 for small fluxes Phi = 0.1 ... 2", fig7()},
      {"fig8", "n = 1 for Phi = 3 ... 6", fig8()},
      {"fig9", "P - P_inf at Phi = pi, 2pi, 3pi, 4pi", fig9()},
      {"fig10", "coupling dependence, epsilon = 0.3, 0.4, 0.5", fig10()},
      {"fig11-desk", "finite lead with soft-core potential, desk scale (about a minute)", fig11(true)},
      {"fig11", "finite lead at full size; long-running job (hours, about 0.8 GB)", fig11(false)},
      {"coefficients", "table of (n, Phi, epsilon) -> (P_inf, delta, C_delta)", coefficients()},
      {"filter-demo", "flux 2pi separates the 1/t and 1/t^3 channels of a superposition", filter_demo()},
  };
  return all;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  std::string known;
  for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw ConfigError({"unknown preset '" + name + "' (known: " + known + ")"});
}

ScenarioConfig preset_config(const std::string& name) { return validate_config(find_preset(name).yaml); }

}  // namespace escape::cli
