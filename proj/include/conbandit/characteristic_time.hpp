#pragma once

#include <json.hpp>

#include "conbandit/alt_projection.hpp"

namespace conbandit {

struct SolveOptions {
  int max_iters = 20000;
  int min_iters = 100;
  double rel_gap = 1e-4;  // stop when best-vs-averaged value gap falls below
  double floor = 1e-6;    // lower bound kept on every w_a during the ascent
  VectorXd warm_start;    // optional initial allocation
};

struct OracleSolution {
  Allocation allocation;           // maximizer of the allocation game
  double game_value = 0.0;         // D(w*, mu, F)
  double characteristic_time = 0;  // 1 / game_value
  VertexPolicy optimal;
  VertexPolicy minimizing_neighbor;  // binding neighbor at w*
};

// Maximizes g(w) = min over neighbors of the projection value over w in the
// exploration set (simplex for EndOfTime, F for Anytime) by projected
// supergradient ascent with iterate averaging. g is concave, so the method
// converges; accuracy is controlled by SolveOptions.
// Throws if the optimum is not unique or the game value is (numerically) zero.
OracleSolution solve_oracle_allocation(const BanditInstance& instance,
                                       const FeasiblePolytope& polytope,
                                       Scenario scenario,
                                       const SolveOptions& options = {});

// Same solve with the optimal vertex and its neighbors already in hand, for
// callers that re-solve every round at drifting means (samplers). Does not
// re-check uniqueness; pass only neighbors with positive gaps.
OracleSolution solve_allocation_game(const BanditInstance& instance,
                                     const FeasiblePolytope& polytope,
                                     Scenario scenario,
                                     const VertexPolicy& optimal,
                                     const NeighborSet& neighbors,
                                     const SolveOptions& options = {});

// D(w, mu, F) for a fixed allocation (convenience wrapper over alt_value).
double game_value(const VectorXd& w, const BanditInstance& instance,
                  const FeasiblePolytope& polytope);

// Gaussian-only analytic bracket of the characteristic time:
//   max_n 2 sigma^2 / d_n^2  <=  T  <=  K * max_n 2 sigma^2 / d_n^2
// where d_n = mu^T(pi* - pi_n) / ||pi* - pi_n||_2 over neighbors n (the
// binding neighbor is the one at the smallest distance).
std::pair<double, double> distance_sandwich(const BanditInstance& instance,
                                            const FeasiblePolytope& polytope);

// Gaussian-only spectral bound: kappa^2 is the squared condition number of
// the best-conditioned independent active basis at the optimum, and
// H = 2 sigma^2 / sum_{a != a*} (mu_max - mu_a)^2. T >= H / kappa^2.
struct ConditioningBound {
  double kappa_squared = 0.0;
  double H = 0.0;
  double sampleLowerBound(double delta) const;  // (H/kappa^2) kl(delta, 1-delta)
};
ConditioningBound conditioning_bound(const BanditInstance& instance,
                                     const FeasiblePolytope& polytope);

// T * binary_kl(delta, 1-delta): no delta-correct learner can stop faster in
// expectation.
double sample_complexity_lower_bound(const BanditInstance& instance,
                                     const FeasiblePolytope& polytope,
                                     Scenario scenario, double delta,
                                     const SolveOptions& options = {});

struct NeighborDistance {
  VectorXd pi;
  double distance = 0.0;  // d_n as in distance_sandwich
};

struct HardnessReport {
  Scenario scenario = Scenario::Anytime;
  double delta = 0.1;
  double characteristic_time = 0.0;
  Allocation oracle_allocation;
  VertexPolicy optimal;
  VertexPolicy minimizing_neighbor;
  std::vector<NeighborDistance> distance_per_neighbor;
  bool has_gaussian_bounds = false;
  std::pair<double, double> sandwich{0.0, 0.0};
  ConditioningBound condition;
  double sample_lower_bound = 0.0;
};

HardnessReport analyze_hardness(const BanditInstance& instance,
                                const FeasiblePolytope& polytope,
                                Scenario scenario, double delta,
                                const SolveOptions& options = {});

nlohmann::json hardnessToJson(const HardnessReport& report);

}  // namespace conbandit
