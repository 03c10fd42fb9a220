// Command-line front end: load a scenario or preset, run it, write results.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qosim/error.hpp"
#include "qosim/scenario.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void list_presets(std::ostream& os) {
  for (const std::string& name : qosim::preset_names()) {
    os << "  " << name << "  " << qosim::preset_description(name) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DiffServ QoS network simulator"};
  std::string scenario_file;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::string out = "results";
  std::vector<std::string> overrides;
  bool show_presets = false;
  bool serial = false;
  bool print_config = false;

  app.add_option("--scenario", scenario_file, "Scenario config file");
  app.add_option("--preset", preset, "Built-in experiment name");
  app.add_option("--seed", seed, "Random seed (overrides the config)");
  app.add_option("--duration", duration, "Simulated seconds (overrides the config)");
  app.add_option("--out", out, "Results root directory");
  app.add_option("--override", overrides, "key=value applied after the config (repeatable)")
      ->take_all();
  app.add_flag("--list-presets", show_presets, "List built-in presets and exit");
  app.add_flag("--serial", serial, "Run sweep members one after another");
  app.add_flag("--print-config", print_config, "Print the resolved config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  if (show_presets) {
    list_presets(std::cout);
    return kExitOk;
  }

  qosim::Scenario scenario;
  try {
    if (!preset.empty()) overrides.insert(overrides.begin(), "preset=" + preset);
    if (seed) overrides.push_back("seed=" + std::to_string(*seed));
    if (duration) overrides.push_back("duration=" + std::to_string(*duration));
    if (!scenario_file.empty()) {
      scenario = qosim::load_scenario_file(scenario_file, overrides);
    } else if (!preset.empty()) {
      scenario = qosim::load_scenario("", overrides);
    } else {
      std::cerr << "error: give --scenario <file> or --preset <name>\n";
      std::cerr << "presets:\n";
      list_presets(std::cerr);
      return kExitValidation;
    }
  } catch (const qosim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    if (e.key() == "preset") {
      std::cerr << "presets:\n";
      list_presets(std::cerr);
    }
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitValidation;
  }

  if (print_config) {
    std::cout << qosim::dump_scenario(scenario);
    return kExitOk;
  }

  try {
    const auto runs = qosim::run_all(scenario, out, !serial);
    for (const auto& r : runs) {
      std::filesystem::path dir = std::filesystem::path(out) / scenario.name;
      if (!r.label.empty()) dir /= r.label;
      const auto& c = r.result.counters;
      std::cout << dir.string() << ": generated=" << c.generated
                << " delivered=" << c.delivered << " dropped="
                << c.dropped_red + c.dropped_overflow << " blocked=" << c.blocked
                << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "runtime fault: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
