#pragma once

#include <cstdint>
#include <string>

#include "conbandit/characteristic_time.hpp"

namespace conbandit {

enum class SamplerKind { Ctns, Cge, Uniform, Oracle, Ptns };

const char* toString(SamplerKind k);
SamplerKind samplerFromString(const std::string& name);

enum class ThresholdKind {
  Heuristic,          // c(t, delta) = log((1 + log log t) / delta)
  TheoreticalAlpha,   // conservative stand-in: log(t^alpha/delta) + K log(log t + 1)
};

enum class RadiusKind {
  LogT,         // f(t) = log t
  Theoretical,  // f(t) = 3 log t + log log t
};

struct StoppingConfig {
  double delta = 0.1;
  ThresholdKind threshold = ThresholdKind::Heuristic;
  double alpha = 2.0;  // only used by TheoreticalAlpha; must be > 1
  RadiusKind cge_radius = RadiusKind::LogT;
};

// Sequential sampler state. counts/sums are indexed by arm; t = total pulls.
struct ExplorerState {
  Eigen::Matrix<long, Eigen::Dynamic, 1> counts;
  VectorXd sums;
  VectorXd empirical_means;  // domain-projected sums/counts
  long t = 0;

  VectorXd cumulative_targets;  // sum of per-round target allocations
  VectorXd adagrad_iterate;     // allocation player's current w (CGE)
  VectorXd adagrad_accum;       // per-coordinate squared-gradient sums (CGE)

  int numArms() const { return static_cast<int>(counts.size()); }
  // Forced-exploration floor for C-tracking.
  double epsilon() const;
};

// Confidence radius f(t) used by the CGE optimism terms.
double cge_radius(long t, RadiusKind kind);

// Stopping threshold c(t, delta). +infinity for t < 3 under Heuristic.
double stopping_threshold(long t, int num_arms, const StoppingConfig& config);

// t * D(N/t, projected empirical means, F); 0 when the empirical optimum is
// tied (never stop on ambiguous evidence) or some arm is unpulled.
double glr_statistic(const ExplorerState& state,
                     const FeasiblePolytope& polytope,
                     const RewardFamily& family, const MeanDomain& domain);

bool should_stop(const ExplorerState& state, const FeasiblePolytope& polytope,
                 const RewardFamily& family, const MeanDomain& domain,
                 const StoppingConfig& config);

struct RunConfig {
  SamplerKind sampler = SamplerKind::Ctns;
  StoppingConfig stopping;
  std::uint64_t seed = 0;
  long step_cap = 10'000'000;   // runs past this are recorded as censored
  int solver_round_cap = 2000;  // inner ascent iterations per sampler round
  VectorXd oracle_allocation;   // precomputed w*(mu), required only by Oracle
  VectorXd env_sigmas;  // optional per-arm environment noise (Gaussian only);
                        // empty = use the model's family sigma
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::string sampler;
  Scenario scenario = Scenario::Anytime;
  long tau = 0;
  int correct = -1;  // 1 correct, 0 wrong, -1 censored/unknown
  VectorXd recommended;
  std::vector<long> counts;
  double wall_ms = 0.0;
  // Post-hoc audit fields.
  double final_statistic = 0.0;
  double min_tracking_margin = 0.0;   // min_t,a N_a - (sqrt(t+K^2) - K); NaN
                                      // for non-tracking samplers
  double max_target_violation = 0.0;  // max over rounds of the target's
                                      // polytope violation (Anytime audit)
  VectorXd final_means;
};

// Executes one full run: init (each arm once), sample until the GLR stopping
// rule fires or step_cap is hit, then recommend. Deterministic given config.
RunRecord run_explorer(const BanditInstance& instance,
                       const FeasiblePolytope& polytope, Scenario scenario,
                       const RunConfig& config);

}  // namespace conbandit
