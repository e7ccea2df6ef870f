#include <doctest.h>

#include <algorithm>
#include <random>

#include "conbandit/characteristic_time.hpp"
#include "conbandit/harness.hpp"
#include "test_util.hpp"

using namespace conbandit;

namespace {

// Dense grid maximization of the game value for K = 3 over the exploration
// set (simplex or F), used as an independent optimality oracle.
double gridMaxGameValue(const BanditInstance& instance,
                        const FeasiblePolytope& polytope, Scenario scenario,
                        double step) {
  const auto opt = solve_optimal_policy(instance.means, polytope);
  const auto nbrs = enumerate_neighbors(opt, polytope);
  double best = 0.0;
  for (double w1 = step; w1 < 1.0; w1 += step) {
    for (double w2 = step; w2 + w1 < 1.0; w2 += step) {
      VectorXd w(3);
      w << w1, w2, 1.0 - w1 - w2;
      if (w[2] <= 0.0) continue;
      if (scenario == Scenario::Anytime && !polytope.isFeasible(w, 1e-9)) {
        continue;
      }
      double val = 1e300;
      for (const auto& nb : nbrs.neighbors) {
        val = std::min(val, project_neighbor(w, instance.means, opt, nb.vertex,
                                             instance.family, instance.domain)
                                .value);
      }
      best = std::max(best, val);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("solver matches the dense grid oracle on K = 3 instances") {
  BanditInstance inst;
  inst.family = RewardFamily::gaussian(1.0);
  inst.domain = {-3.0, 3.0};
  inst.means.resize(3);
  inst.means << 1.0, 0.5, 0.1;

  MatrixXd extra(1, 3);
  extra << 1.0, 1.0, 0.0;
  VectorXd ec(1);
  ec << 0.6;
  const auto constrained = FeasiblePolytope::fromConstraints(3, extra, ec);
  const auto simplex = FeasiblePolytope::simplexOnly(3);

  for (const auto* poly : {&constrained, &simplex}) {
    for (Scenario sc : {Scenario::EndOfTime, Scenario::Anytime}) {
      const auto sol = solve_oracle_allocation(inst, *poly, sc);
      const double grid = gridMaxGameValue(inst, *poly, sc, 0.005);
      CHECK(sol.game_value >= 0.99 * grid);
      CHECK(sol.game_value <= 1.01 * grid);
      CHECK(sol.characteristic_time == doctest::Approx(1.0 / sol.game_value));
    }
  }
}

TEST_CASE("simplex-only solve matches the classical 1-D characterization") {
  std::mt19937 gen(43);
  std::uniform_real_distribution<double> mean_dist(-1.0, 1.0);
  int done = 0;
  while (done < 10) {
    const int k = 2 + static_cast<int>(gen() % 5);
    VectorXd means(k);
    for (int a = 0; a < k; ++a) means[a] = mean_dist(gen);
    // Require a clearly unique best arm.
    std::vector<double> sorted(means.data(), means.data() + k);
    std::sort(sorted.rbegin(), sorted.rend());
    if (sorted[0] - sorted[1] < 0.05) continue;

    BanditInstance inst;
    inst.means = means;
    inst.family = RewardFamily::gaussian(1.0);
    inst.domain = {-50.0, 50.0};
    const auto poly = FeasiblePolytope::simplexOnly(k);
    const auto sol = solve_oracle_allocation(inst, poly, Scenario::EndOfTime);
    const double oracle = testutil::classicalBaiTime(means, 1.0);
    CHECK(sol.characteristic_time ==
          doctest::Approx(oracle).epsilon(0.01));
    ++done;
  }
}

TEST_CASE("distance sandwich brackets the characteristic time") {
  // The upper bound comes from playing the uniform allocation, which lives in
  // the exploration set only in the end-of-time scenario; the lower bound
  // holds in both scenarios.
  std::mt19937 gen(47);
  for (int rep = 0; rep < 25; ++rep) {
    const auto prob = testutil::randomGaussianProblem(gen, 5, 2);
    const auto [lo, hi] = distance_sandwich(prob.instance, prob.polytope);
    const auto eot =
        solve_oracle_allocation(prob.instance, prob.polytope, Scenario::EndOfTime);
    CHECK(lo <= eot.characteristic_time * (1.0 + 1e-6));
    CHECK(eot.characteristic_time <= hi * (1.0 + 1e-6));
    const auto any =
        solve_oracle_allocation(prob.instance, prob.polytope, Scenario::Anytime);
    CHECK(lo <= any.characteristic_time * (1.0 + 1e-6));
  }
}

TEST_CASE("conditioning bound is consistent") {
  std::mt19937 gen(53);
  int defined = 0;
  for (int rep = 0; rep < 25; ++rep) {
    const auto prob = testutil::randomGaussianProblem(gen, 5, 2);
    const auto sol =
        solve_oracle_allocation(prob.instance, prob.polytope, Scenario::EndOfTime);
    try {
      const auto cb = conditioning_bound(prob.instance, prob.polytope);
      CHECK(cb.kappa_squared >= 1.0 - 1e-9);
      CHECK(cb.H > 0.0);
      // T >= H / kappa^2, i.e. the spectral bound never exceeds the exact
      // lower bound.
      CHECK(cb.H / cb.kappa_squared <= sol.characteristic_time * (1.0 + 1e-6));
      CHECK(cb.sampleLowerBound(0.1) ==
            doctest::Approx((cb.H / cb.kappa_squared) * binary_kl(0.1, 0.9)));
      ++defined;
    } catch (const std::runtime_error&) {
      // no independent active basis: bound undefined, nothing to check
    }
  }
  CHECK(defined > 10);
}

TEST_CASE("rank-one-update form of the game value matches the ratio form") {
  // For each neighbor reached by relaxing basis row r', the direction
  // B_hat^{-1} e_{r'} is parallel to pi* - pi', so the gap-based ratio
  // (Delta^T u)^2 / ||u||^2_{Diag(1/w)} equals the projection value (times
  // 2 sigma^2), Delta_a = mu_max - mu_a.
  std::mt19937 gen(59);
  int checked = 0;
  for (int rep = 0; rep < 30; ++rep) {
    const auto prob = testutil::randomGaussianProblem(gen, 5, 2);
    const int k = prob.polytope.numArms();
    const auto opt = solve_optimal_policy(prob.instance.means, prob.polytope);
    const auto nbrs = enumerate_neighbors(opt, prob.polytope);
    const VectorXd w = testutil::randomAllocation(gen, k);

    MatrixXd bhat(k, k);
    for (int i = 0; i < k; ++i) bhat.row(i) = prob.polytope.B().row(opt.basis[i]);
    Eigen::FullPivLU<MatrixXd> lu(bhat);
    if (!lu.isInvertible()) continue;

    const double mu_max = prob.instance.means.maxCoeff();
    const VectorXd delta =
        VectorXd::Constant(k, mu_max) - prob.instance.means;

    for (const auto& nb : nbrs.neighbors) {
      const auto pos = std::find(opt.basis.begin(), opt.basis.end(),
                                 nb.leaving_row);
      if (pos == opt.basis.end()) continue;  // pivot from an alternate basis
      VectorXd e = VectorXd::Zero(k);
      e[static_cast<int>(pos - opt.basis.begin())] = 1.0;
      const VectorXd u = lu.solve(e);

      double denom = 0.0;
      for (int a = 0; a < k; ++a) denom += u[a] * u[a] / w[a];
      const double num = delta.dot(u);
      const double ratio_form = num * num / (2.0 * denom);

      const auto r = project_gaussian(w, prob.instance.means, opt, nb.vertex,
                                      prob.instance.domain, 1.0);
      if (r.value <= 0.0) continue;
      CHECK(std::abs(ratio_form - r.value) <= 1e-8 * (1.0 + r.value));
      ++checked;
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("tied optimum is rejected") {
  BanditInstance inst;
  inst.family = RewardFamily::gaussian(1.0);
  inst.domain = {-2.0, 2.0};
  inst.means.resize(3);
  inst.means << 1.0, 1.0, 0.0;
  const auto poly = FeasiblePolytope::simplexOnly(3);
  CHECK_THROWS(solve_oracle_allocation(inst, poly, Scenario::EndOfTime));
}

TEST_CASE("warm start converges to the same value") {
  BanditInstance inst;
  inst.family = RewardFamily::gaussian(1.0);
  inst.domain = {-3.0, 3.0};
  inst.means.resize(4);
  inst.means << 1.0, 0.6, 0.3, 0.0;
  const auto poly = FeasiblePolytope::simplexOnly(4);

  const auto cold = solve_oracle_allocation(inst, poly, Scenario::EndOfTime);
  SolveOptions warm_opts;
  warm_opts.warm_start = cold.allocation.w;
  warm_opts.min_iters = 50;
  const auto warm =
      solve_oracle_allocation(inst, poly, Scenario::EndOfTime, warm_opts);
  CHECK(warm.game_value >= 0.999 * cold.game_value);
}

TEST_CASE("sample complexity lower bound is T times the binary kl") {
  BanditInstance inst;
  inst.family = RewardFamily::gaussian(1.0);
  inst.domain = {-3.0, 3.0};
  inst.means.resize(3);
  inst.means << 1.0, 0.4, 0.0;
  const auto poly = FeasiblePolytope::simplexOnly(3);
  const auto sol = solve_oracle_allocation(inst, poly, Scenario::EndOfTime);
  const double lb =
      sample_complexity_lower_bound(inst, poly, Scenario::EndOfTime, 0.05);
  CHECK(lb == doctest::Approx(sol.characteristic_time * binary_kl(0.05, 0.95))
                  .epsilon(1e-3));
}

TEST_CASE("hardness report and JSON") {
  const auto spec = builtin_scenario("fig3-triangle");
  const auto rep = analyze_hardness(spec.instance, spec.polytope,
                                    Scenario::Anytime, 0.1);
  CHECK(rep.characteristic_time > 0.0);
  CHECK(rep.sample_lower_bound ==
        doctest::Approx(rep.characteristic_time * binary_kl(0.1, 0.9)));
  CHECK(rep.has_gaussian_bounds);
  CHECK(rep.sandwich.first <= rep.characteristic_time * (1 + 1e-6));
  CHECK(rep.characteristic_time <= rep.sandwich.second * (1 + 1e-6));
  CHECK(!rep.distance_per_neighbor.empty());

  const auto doc = hardnessToJson(rep);
  CHECK(doc.contains("characteristic_time"));
  CHECK(doc.contains("oracle_allocation"));
  CHECK(doc.contains("sandwich"));
  CHECK(doc.contains("conditioning"));
  CHECK(doc["optimal_policy"].size() == 5);
}

TEST_CASE("allocation sums to one and respects the scenario set") {
  const auto spec = builtin_scenario("fig3-triangle");
  for (Scenario sc : {Scenario::EndOfTime, Scenario::Anytime}) {
    const auto sol = solve_oracle_allocation(spec.instance, spec.polytope, sc);
    CHECK(sol.allocation.w.sum() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.allocation.w.minCoeff() >= -1e-9);
    if (sc == Scenario::Anytime) {
      CHECK(spec.polytope.maxViolation(sol.allocation.w) <= 1e-6);
    }
  }
}
