#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "conbandit/explorers.hpp"

namespace conbandit {

// A full experiment description: instance + constraints + which samplers to
// run over which seeds.
struct ScenarioSpec {
  std::string name;
  std::string description;
  BanditInstance instance;
  FeasiblePolytope polytope;
  Scenario scenario = Scenario::Anytime;
  double delta = 0.1;
  std::vector<SamplerKind> samplers = {SamplerKind::Ctns, SamplerKind::Cge,
                                       SamplerKind::Uniform,
                                       SamplerKind::Oracle, SamplerKind::Ptns};
  int num_seeds = 500;
  std::uint64_t base_seed = 1;
  long step_cap = 10'000'000;
  VectorXd env_sigmas;  // optional per-arm environment noise (Gaussian)
};

// Built-in catalog. Unknown names raise an error listing close matches.
std::vector<std::pair<std::string, std::string>> list_scenarios();
ScenarioSpec builtin_scenario(const std::string& name);
ScenarioSpec scenario_from_json(const nlohmann::json& doc);

struct SamplerSummary {
  std::string sampler;
  int runs = 0;
  int errors = 0;
  int censored = 0;
  double error_rate = 0.0;  // errors / decided runs
  double mean_tau = 0.0;
  double std_tau = 0.0;
  double q10 = 0.0, q50 = 0.0, q90 = 0.0;
  double mean_wall_ms = 0.0;
};

struct ExperimentSummary {
  std::string scenario_name;
  Scenario scenario = Scenario::Anytime;
  double delta = 0.1;
  double characteristic_time = 0.0;
  double sample_lower_bound = 0.0;
  VectorXd oracle_allocation;
  std::vector<SamplerSummary> per_sampler;
};

// One CSV line per run (no header). Wall time is the last field so the
// deterministic prefix of the row can be compared across repeats.
std::string csvHeader(int num_arms);
std::string csvRow(const RunRecord& record);

// Executes every (sampler x seed) run, in `jobs` worker threads, rows ordered
// by (sampler, seed). If out_dir is nonempty, writes runs.csv and
// summary.json there.
ExperimentSummary run_experiment(const ScenarioSpec& spec,
                                 const std::string& out_dir, int jobs,
                                 std::vector<RunRecord>* records = nullptr);

ExperimentSummary summarize(const ScenarioSpec& spec,
                            const std::vector<RunRecord>& records,
                            double characteristic_time,
                            const VectorXd& oracle_allocation);

nlohmann::json summaryToJson(const ExperimentSummary& summary);

// Hardness sweep over a 2-D grid of means: cell (i, j) holds the
// characteristic time at means with arm_i = value_i, arm_j = value_j, clipped
// at 1e6; null where the optimum is not unique.
struct SweepSpec {
  int arm_i = 0;
  double lo_i = 0.0, hi_i = 1.0;
  int steps_i = 10;
  int arm_j = 1;
  double lo_j = 0.0, hi_j = 1.0;
  int steps_j = 10;
};

nlohmann::json sweep_grid(const ScenarioSpec& spec, const SweepSpec& sweep);

}  // namespace conbandit
