// escape: command line front end for the scenario runner.
//
//   escape run <config> [--out DIR]
//   escape preset <name> [--out DIR]
//   escape list-presets
//   escape validate <config>
//
// Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence,
// 1 anything else. ESCAPE_THREADS sets the worker count.

#include <CLI11.hpp>

#include <iostream>

#include "presets.hpp"
#include "scenario.hpp"

namespace {

using namespace escape;
using namespace escape::cli;

int report(const ScenarioConfig& c, const RunResult& r) {
  std::cout << "scenario " << c.name << " -> " << r.out_dir << "\n";
  for (const auto& f : r.files) std::cout << "  " << f << "\n";
  std::cout << "wall time " << r.manifest.value("wall_time_s", 0.0) << " s\n";
  return 0;
}

std::string out_dir_for(const ScenarioConfig& c, const std::string& flag) {
  if (!flag.empty()) return flag;
  if (!c.output_dir.empty()) return c.output_dir;
  return c.name;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonescape probability of a particle in a flux-threaded loop coupled to a lead"};
  app.require_subcommand(1);

  std::string config_path, preset_name, out;
  auto* run = app.add_subcommand("run", "run a scenario file");
  run->add_option("config", config_path, "YAML scenario")->required();
  run->add_option("--out", out, "output directory (default: output.dir or the scenario name)");

  auto* preset = app.add_subcommand("preset", "run a built-in scenario");
  preset->add_option("name", preset_name, "preset name (see list-presets)")->required();
  preset->add_option("--out", out, "output directory (default: the preset name)");

  auto* list = app.add_subcommand("list-presets", "list built-in scenarios");
  bool show_yaml = false;
  list->add_flag("--yaml", show_yaml, "print each preset's scenario file");

  auto* validate = app.add_subcommand("validate", "check a scenario file and print its canonical form");
  validate->add_option("config", config_path, "YAML scenario")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*list) {
      for (const auto& p : presets()) {
        std::cout << p.name << "  " << p.summary << "\n";
        if (show_yaml) std::cout << p.yaml << "\n";
      }
      return 0;
    }
    if (*validate) {
      const auto c = load_config(config_path);
      std::cout << to_json(c).dump(2) << "\n";
      return 0;
    }
    if (*run) {
      const auto c = load_config(config_path);
      return report(c, run_scenario(c, out_dir_for(c, out)));
    }
    if (*preset) {
      const auto c = preset_config(preset_name);
      return report(c, run_scenario(c, out_dir_for(c, out)));
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "no convergence: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
