#include "conbandit/characteristic_time.hpp"

#include <cmath>
#include <limits>
#include <json.hpp>
#include <stdexcept>

namespace conbandit {

namespace {

struct GameEval {
  double value = 0.0;
  int argmin = -1;        // index into the neighbor list
  VectorXd supergradient;  // kl(mu_a, lambda_a) at the binding neighbor
};

// min over neighbors of the projection value, with a supergradient in w.
GameEval evaluateGame(const VectorXd& w, const BanditInstance& instance,
                      const VertexPolicy& optimal, const NeighborSet& nbrs) {
  GameEval out;
  VectorXd best_lambda;
  for (size_t i = 0; i < nbrs.neighbors.size(); ++i) {
    const ProjectionResult r =
        project_neighbor(w, instance.means, optimal, nbrs.neighbors[i].vertex,
                         instance.family, instance.domain);
    if (out.argmin < 0 || r.value < out.value) {
      out.value = r.value;
      out.argmin = static_cast<int>(i);
      best_lambda = r.lambda;
    }
  }
  const int K = instance.numArms();
  out.supergradient = VectorXd::Zero(K);
  for (int a = 0; a < K; ++a) {
    out.supergradient[a] = kl(instance.family, instance.means[a], best_lambda[a]);
  }
  return out;
}

VectorXd projectOntoExplorationSet(const VectorXd& w,
                                   const FeasiblePolytope& polytope,
                                   Scenario scenario, double floor) {
  const VectorXd lb = VectorXd::Constant(w.size(), floor);
  if (scenario == Scenario::EndOfTime) return project_to_simplex(w, lb);
  try {
    return euclidean_project(w, polytope, lb);
  } catch (const std::runtime_error&) {
    // The floor can empty F when a constraint pins a coordinate at zero.
    return euclidean_project(w, polytope);
  }
}

}  // namespace

double game_value(const VectorXd& w, const BanditInstance& instance,
                  const FeasiblePolytope& polytope) {
  return alt_value(w, instance.means, polytope, instance.family,
                   instance.domain)
      .value;
}

OracleSolution solve_oracle_allocation(const BanditInstance& instance,
                                       const FeasiblePolytope& polytope,
                                       Scenario scenario,
                                       const SolveOptions& options) {
  const VertexPolicy optimal = solve_optimal_policy(instance.means, polytope);
  const NeighborSet nbrs = enumerate_neighbors(optimal, polytope);
  if (nbrs.neighbors.empty()) {
    throw std::runtime_error("solve_oracle_allocation: optimum has no neighbors");
  }
  for (const auto& nb : nbrs.neighbors) {
    if (instance.means.dot(optimal.pi - nb.vertex.pi) <= 1e-9) {
      throw std::runtime_error(
          "solve_oracle_allocation: optimum not unique at these means");
    }
  }
  return solve_allocation_game(instance, polytope, scenario, optimal, nbrs,
                               options);
}

OracleSolution solve_allocation_game(const BanditInstance& instance,
                                     const FeasiblePolytope& polytope,
                                     Scenario scenario,
                                     const VertexPolicy& optimal,
                                     const NeighborSet& nbrs,
                                     const SolveOptions& options) {
  const int K = instance.numArms();
  VectorXd w = options.warm_start.size() == K
                   ? options.warm_start
                   : VectorXd::Constant(K, 1.0 / K);
  w = projectOntoExplorationSet(w, polytope, scenario, options.floor);

  VectorXd w_best = w, w_avg = w;
  double g_best = -1.0;
  double g_avg = -1.0;
  int it = 1;
  for (; it <= options.max_iters; ++it) {
    const GameEval eval = evaluateGame(w, instance, optimal, nbrs);
    if (eval.value > g_best) {
      g_best = eval.value;
      w_best = w;
    }
    w_avg = ((it - 1) * w_avg + w) / it;

    if (it % 50 == 0 && it >= options.min_iters) {
      g_avg = evaluateGame(w_avg, instance, optimal, nbrs).value;
      if (g_best - g_avg <= options.rel_gap * std::max(g_best, 1e-300)) break;
    }

    const double gnorm = eval.supergradient.norm();
    if (gnorm <= 1e-300) break;
    const double eta = 0.5 / std::sqrt(static_cast<double>(it));
    w = projectOntoExplorationSet(w + (eta / gnorm) * eval.supergradient,
                                  polytope, scenario, options.floor);
  }

  if (g_avg < 0.0) g_avg = evaluateGame(w_avg, instance, optimal, nbrs).value;
  OracleSolution sol;
  sol.allocation.w = g_avg >= g_best ? w_avg : w_best;
  const GameEval final_eval = evaluateGame(sol.allocation.w, instance, optimal, nbrs);
  sol.game_value = final_eval.value;
  if (sol.game_value <= 1e-12) {
    throw std::runtime_error(
        "solve_oracle_allocation: game value is zero (optimum is tied)");
  }
  sol.characteristic_time = 1.0 / sol.game_value;
  sol.optimal = optimal;
  sol.minimizing_neighbor = nbrs.neighbors[final_eval.argmin].vertex;
  return sol;
}

std::pair<double, double> distance_sandwich(const BanditInstance& instance,
                                            const FeasiblePolytope& polytope) {
  if (instance.family.kind != FamilyKind::Gaussian) {
    throw std::invalid_argument("distance_sandwich: Gaussian only");
  }
  const VertexPolicy optimal = solve_optimal_policy(instance.means, polytope);
  const NeighborSet nbrs = enumerate_neighbors(optimal, polytope);
  const double s2 = instance.family.sigma * instance.family.sigma;
  // The binding neighbor is the one at the smallest projection distance:
  // T >= 2 sigma^2 / d_n^2 holds for every neighbor (Cauchy-Schwarz on the
  // closed-form value), and uniform weights give T <= 2 sigma^2 K / d_min^2.
  double lower = 0.0;
  for (const auto& nb : nbrs.neighbors) {
    const VectorXd v = optimal.pi - nb.vertex.pi;
    const double d = instance.means.dot(v) / v.norm();
    lower = std::max(lower, 2.0 * s2 / (d * d));
  }
  return {lower, lower * instance.numArms()};
}

double ConditioningBound::sampleLowerBound(double delta) const {
  return (H / kappa_squared) * binary_kl(delta, 1.0 - delta);
}

ConditioningBound conditioning_bound(const BanditInstance& instance,
                                     const FeasiblePolytope& polytope) {
  if (instance.family.kind != FamilyKind::Gaussian) {
    throw std::invalid_argument("conditioning_bound: Gaussian only");
  }
  const VertexPolicy optimal = solve_optimal_policy(instance.means, polytope);
  const int K = instance.numArms();
  std::vector<int> active;
  for (int i = 0; i < polytope.numRows(); ++i) {
    if (std::abs(polytope.B().row(i).dot(optimal.pi) - polytope.c()[i]) <= 1e-9) {
      active.push_back(i);
    }
  }

  // Best (smallest) squared condition number over independent active bases.
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick;
  auto rec = [&](auto&& self, size_t from) -> void {
    if (static_cast<int>(pick.size()) == K) {
      MatrixXd bhat(K, K);
      for (int i = 0; i < K; ++i) bhat.row(i) = polytope.B().row(pick[i]);
      Eigen::JacobiSVD<MatrixXd> svd(bhat);
      const double smin = svd.singularValues().minCoeff();
      if (smin <= 1e-10) return;
      const double kappa = svd.singularValues().maxCoeff() / smin;
      best = std::min(best, kappa * kappa);
      return;
    }
    const int need = K - static_cast<int>(pick.size());
    for (size_t i = from; i + need <= active.size(); ++i) {
      pick.push_back(active[i]);
      self(self, i + 1);
      pick.pop_back();
    }
  };
  rec(rec, 0);
  if (!std::isfinite(best)) {
    throw std::runtime_error("conditioning_bound: no independent active basis");
  }

  const double mu_max = instance.means.maxCoeff();
  double gap2 = 0.0;
  for (int a = 0; a < K; ++a) {
    const double d = mu_max - instance.means[a];
    gap2 += d * d;
  }
  ConditioningBound out;
  out.kappa_squared = best;
  out.H = 2.0 * instance.family.sigma * instance.family.sigma / gap2;
  return out;
}

double sample_complexity_lower_bound(const BanditInstance& instance,
                                     const FeasiblePolytope& polytope,
                                     Scenario scenario, double delta,
                                     const SolveOptions& options) {
  const auto sol = solve_oracle_allocation(instance, polytope, scenario, options);
  return sol.characteristic_time * binary_kl(delta, 1.0 - delta);
}

HardnessReport analyze_hardness(const BanditInstance& instance,
                                const FeasiblePolytope& polytope,
                                Scenario scenario, double delta,
                                const SolveOptions& options) {
  HardnessReport rep;
  rep.scenario = scenario;
  rep.delta = delta;

  const auto sol = solve_oracle_allocation(instance, polytope, scenario, options);
  rep.characteristic_time = sol.characteristic_time;
  rep.oracle_allocation = sol.allocation;
  rep.optimal = sol.optimal;
  rep.minimizing_neighbor = sol.minimizing_neighbor;
  rep.sample_lower_bound =
      sol.characteristic_time * binary_kl(delta, 1.0 - delta);

  const NeighborSet nbrs = enumerate_neighbors(sol.optimal, polytope);
  for (const auto& nb : nbrs.neighbors) {
    const VectorXd v = sol.optimal.pi - nb.vertex.pi;
    rep.distance_per_neighbor.push_back(
        {nb.vertex.pi, instance.means.dot(v) / v.norm()});
  }

  if (instance.family.kind == FamilyKind::Gaussian) {
    rep.has_gaussian_bounds = true;
    rep.sandwich = distance_sandwich(instance, polytope);
    rep.condition = conditioning_bound(instance, polytope);
  }
  return rep;
}

nlohmann::json hardnessToJson(const HardnessReport& report) {
  nlohmann::json doc;
  doc["scenario"] = toString(report.scenario);
  doc["delta"] = report.delta;
  doc["characteristic_time"] = report.characteristic_time;
  doc["oracle_allocation"] = std::vector<double>(
      report.oracle_allocation.w.begin(), report.oracle_allocation.w.end());
  doc["optimal_policy"] =
      std::vector<double>(report.optimal.pi.begin(), report.optimal.pi.end());
  doc["minimizing_neighbor"] = std::vector<double>(
      report.minimizing_neighbor.pi.begin(), report.minimizing_neighbor.pi.end());
  doc["sample_lower_bound"] = report.sample_lower_bound;
  doc["neighbors"] = nlohmann::json::array();
  for (const auto& nd : report.distance_per_neighbor) {
    doc["neighbors"].push_back(
        {{"pi", std::vector<double>(nd.pi.begin(), nd.pi.end())},
         {"distance", nd.distance}});
  }
  if (report.has_gaussian_bounds) {
    doc["sandwich"] = {report.sandwich.first, report.sandwich.second};
    doc["conditioning"] = {{"kappa_squared", report.condition.kappa_squared},
                           {"H", report.condition.H},
                           {"sample_lower_bound",
                            report.condition.sampleLowerBound(report.delta)}};
  }
  return doc;
}

}  // namespace conbandit
