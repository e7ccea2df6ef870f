#pragma once

#include <random>

#include "conbandit/characteristic_time.hpp"
#include "conbandit/polytope.hpp"

namespace testutil {

using conbandit::BanditInstance;
using conbandit::FeasiblePolytope;
using conbandit::MatrixXd;
using conbandit::VectorXd;

struct RandomProblem {
  BanditInstance instance;
  FeasiblePolytope polytope;
};

inline VectorXd randomSimplexPoint(std::mt19937& gen, int k) {
  std::exponential_distribution<double> exp1(1.0);
  VectorXd p(k);
  for (int a = 0; a < k; ++a) p[a] = exp1(gen);
  return p / p.sum();
}

// Random Gaussian instance with a feasible polytope and a unique optimum.
// Extra rows are built around a random feasible anchor point so F is never
// empty. Total row count is K + 2 + num_extra.
inline RandomProblem randomGaussianProblem(std::mt19937& gen, int max_arms = 6,
                                           int max_extra = 3,
                                           double domain_halfwidth = 50.0) {
  std::uniform_int_distribution<int> arms_dist(2, max_arms);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_real_distribution<double> mean_dist(-1.0, 1.0);

  for (int attempt = 0; attempt < 1000; ++attempt) {
    const int k = arms_dist(gen);
    std::uniform_int_distribution<int> extra_dist(0, max_extra);
    const int n_extra = extra_dist(gen);

    const VectorXd anchor = randomSimplexPoint(gen, k);
    MatrixXd extra_b(n_extra, k);
    VectorXd extra_c(n_extra);
    for (int r = 0; r < n_extra; ++r) {
      for (int a = 0; a < k; ++a) extra_b(r, a) = coef(gen);
      // Slack in (0.05, 0.55) keeps the anchor strictly inside the row.
      extra_c[r] = extra_b.row(r).dot(anchor) + 0.05 + 0.5 * unit(gen);
    }
    auto polytope = FeasiblePolytope::fromConstraints(k, extra_b, extra_c);
    if (!polytope.feasible()) continue;

    BanditInstance instance;
    instance.family = conbandit::RewardFamily::gaussian(1.0);
    instance.domain = {-domain_halfwidth, domain_halfwidth};
    instance.means.resize(k);
    for (int a = 0; a < k; ++a) instance.means[a] = mean_dist(gen);

    // Require a strictly unique optimum (every neighbor gap clearly positive).
    try {
      const auto opt = conbandit::solve_optimal_policy(instance.means, polytope);
      const auto nbrs = conbandit::enumerate_neighbors(opt, polytope);
      if (nbrs.neighbors.empty()) continue;
      bool unique = true;
      for (const auto& nb : nbrs.neighbors) {
        if (instance.means.dot(opt.pi - nb.vertex.pi) < 1e-4) unique = false;
      }
      if (!unique) continue;
    } catch (const std::exception&) {
      continue;
    }
    return {instance, polytope};
  }
  throw std::runtime_error("randomGaussianProblem: generation failed");
}

// Random allocation with every coordinate bounded away from zero.
inline VectorXd randomAllocation(std::mt19937& gen, int k,
                                 double floor = 0.01) {
  VectorXd w = randomSimplexPoint(gen, k);
  w = (w.array() + floor).matrix();
  return w / w.sum();
}

// Independent classical fixed-confidence BAI characteristic time for Gaussian
// arms over the simplex: max_w min_a (w* w_a / (w* + w_a)) (mu* - mu_a)^2 /
// (2 sigma^2), computed by golden-section search over the best arm's weight
// with an inner bisection on the common value.
inline double classicalBaiTime(const VectorXd& means, double sigma) {
  const int k = static_cast<int>(means.size());
  int best = 0;
  for (int a = 1; a < k; ++a) {
    if (means[a] > means[best]) best = a;
  }
  std::vector<double> gap2;
  for (int a = 0; a < k; ++a) {
    if (a == best) continue;
    const double d = means[best] - means[a];
    gap2.push_back(d * d);
  }
  const double min_gap2 = *std::min_element(gap2.begin(), gap2.end());

  // For fixed w1, the common raw value c (= 2 sigma^2 g) solves
  // sum_a c w1 / (w1 gap2_a - c) = 1 - w1, increasing in c on (0, w1 min gap2).
  auto valueAt = [&](double w1) {
    double lo = 0.0, hi = w1 * min_gap2 * (1.0 - 1e-12);
    for (int it = 0; it < 200; ++it) {
      const double c = 0.5 * (lo + hi);
      double sum = 0.0;
      for (double g2 : gap2) sum += c * w1 / (w1 * g2 - c);
      (sum < 1.0 - w1 ? lo : hi) = c;
    }
    return 0.5 * (lo + hi);
  };

  // valueAt is unimodal in w1: golden-section search.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 1e-9, b = 1.0 - 1e-9;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = valueAt(x1), f2 = valueAt(x2);
  for (int it = 0; it < 200; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = valueAt(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = valueAt(x1);
    }
  }
  const double c = std::max(f1, f2);
  return 2.0 * sigma * sigma / c;
}

}  // namespace testutil
