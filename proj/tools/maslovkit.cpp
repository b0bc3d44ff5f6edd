#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "maslovkit/scenario.hpp"

using namespace maslovkit;

int main(int argc, char** argv) {
  CLI::App app{"maslovkit - Maslov index and conjugate/focal point toolkit"};
  app.require_subcommand(1);

  // run <scenario.json> [--out DIR] [--step H]
  auto* run = app.add_subcommand("run", "run a scenario file and write the report bundle");
  std::string scenario_path;
  std::string out_dir = "out";
  double step_override = 0.0;
  run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--step", step_override, "override the integration step");

  // model <name> [--n N] [--interval A B] [--emit FILE]
  auto* model = app.add_subcommand("model", "emit a built-in model scenario");
  std::string model_name;
  int model_n = 3;
  std::vector<double> model_interval;
  std::string emit_path;
  double model_step = 1e-3;
  model->add_option("name", model_name, "flat | sphere | hyperbolic | lorentz-flat | lorentz-const")
      ->required();
  model->add_option("--n", model_n, "dimension");
  model->add_option("--interval", model_interval, "interval a b")->expected(2);
  model->add_option("--step", model_step, "integration step");
  model->add_option("--emit", emit_path, "write the scenario JSON to this file");

  // props [--seed S] [--trials T] [--dims LIST]
  auto* props = app.add_subcommand("props", "run the randomized property suites");
  std::uint64_t props_seed = 42;
  int props_trials = 100;
  std::vector<int> props_dims = {1, 2, 3};
  props->add_option("--seed", props_seed, "RNG seed");
  props->add_option("--trials", props_trials, "trials per check and dimension");
  props->add_option("--dims", props_dims, "dimensions to exercise")->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      Scenario s = load_scenario_file(scenario_path);
      if (step_override > 0.0) s.step = step_override;
      const RunOutcome outcome = run_scenario(s, out_dir);
      std::cout << outcome.message << "\n";
      return outcome.exit_code;
    }
    if (*model) {
      std::optional<std::pair<double, double>> interval;
      if (model_interval.size() == 2) interval = {model_interval[0], model_interval[1]};
      const Scenario s = builtin_model(model_name, model_n, interval, model_step);
      const std::string text = scenario_to_json(s).dump(2) + "\n";
      if (!emit_path.empty()) {
        std::ofstream out(emit_path, std::ios::binary);
        if (!out) throw InvalidInput("cannot write '" + emit_path + "'");
        out << text;
      } else {
        std::cout << text;
      }
      return 0;
    }
    if (*props) {
      return property_suite(props_seed, props_trials, props_dims, std::cout);
    }
  } catch (const InvalidInput& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
