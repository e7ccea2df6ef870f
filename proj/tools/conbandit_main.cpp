#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "conbandit/harness.hpp"

namespace {

using namespace conbandit;

ScenarioSpec loadScenario(const std::string& ref) {
  if (std::filesystem::exists(ref)) {
    std::ifstream in(ref);
    nlohmann::json doc;
    in >> doc;
    return scenario_from_json(doc);
  }
  return builtin_scenario(ref);
}

Scenario parseMode(const std::string& mode) {
  if (mode == "anytime") return Scenario::Anytime;
  if (mode == "end_of_time") return Scenario::EndOfTime;
  throw CLI::ValidationError("--mode must be anytime or end_of_time");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conbandit: constrained pure-exploration bandit simulator"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run a Monte Carlo experiment");
  std::string scenario_ref, samplers_csv, mode, out_dir = "out";
  int seeds = 500, jobs = 1;
  std::uint64_t base_seed = 1;
  double delta = -1.0;
  long step_cap = 10'000'000;
  run->add_option("--scenario", scenario_ref, "built-in name or JSON file")
      ->required();
  run->add_option("--samplers", samplers_csv,
                  "comma list of ctns,cge,uniform,oracle,ptns");
  run->add_option("--seeds", seeds, "number of seeds per sampler");
  run->add_option("--base-seed", base_seed, "first seed value");
  run->add_option("--delta", delta, "confidence level (default: scenario's)");
  run->add_option("--mode", mode, "anytime | end_of_time");
  run->add_option("--step-cap", step_cap, "censor runs beyond this many pulls");
  run->add_option("--out", out_dir, "output directory for runs.csv + summary.json");
  run->add_option("--jobs", jobs, "worker threads");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "compute instance hardness");
  std::string a_scenario, a_mode, a_out = "hardness.json";
  double a_delta = -1.0;
  std::vector<double> sweep_args;
  analyze->add_option("--scenario", a_scenario, "built-in name or JSON file")
      ->required();
  analyze->add_option("--mode", a_mode, "anytime | end_of_time");
  analyze->add_option("--delta", a_delta, "confidence level");
  analyze
      ->add_option("--sweep", sweep_args,
                   "arm_i lo hi steps arm_j lo hi steps: grid of "
                   "characteristic times over two arm means")
      ->expected(8);
  analyze->add_option("--out", a_out, "output JSON file");

  // list
  app.add_subcommand("list", "list built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      ScenarioSpec spec = loadScenario(scenario_ref);
      if (!samplers_csv.empty()) {
        spec.samplers.clear();
        std::stringstream ss(samplers_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          spec.samplers.push_back(samplerFromString(tok));
        }
      }
      spec.num_seeds = seeds;
      spec.base_seed = base_seed;
      spec.step_cap = step_cap;
      if (delta > 0.0) spec.delta = delta;
      if (!mode.empty()) spec.scenario = parseMode(mode);
      const auto summary = run_experiment(spec, out_dir, jobs);
      std::cout << summaryToJson(summary).dump(2) << "\n";
    } else if (analyze->parsed()) {
      ScenarioSpec spec = loadScenario(a_scenario);
      if (a_delta > 0.0) spec.delta = a_delta;
      if (!a_mode.empty()) spec.scenario = parseMode(a_mode);
      nlohmann::json doc;
      if (!sweep_args.empty()) {
        SweepSpec sw;
        sw.arm_i = static_cast<int>(sweep_args[0]);
        sw.lo_i = sweep_args[1];
        sw.hi_i = sweep_args[2];
        sw.steps_i = static_cast<int>(sweep_args[3]);
        sw.arm_j = static_cast<int>(sweep_args[4]);
        sw.lo_j = sweep_args[5];
        sw.hi_j = sweep_args[6];
        sw.steps_j = static_cast<int>(sweep_args[7]);
        doc = sweep_grid(spec, sw);
      } else {
        doc = hardnessToJson(analyze_hardness(spec.instance, spec.polytope,
                                              spec.scenario, spec.delta));
      }
      std::ofstream(a_out) << doc.dump(2) << "\n";
      std::cout << doc.dump(2) << "\n";
    } else {
      for (const auto& [name, description] : list_scenarios()) {
        std::cout << name << "\n    " << description << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
