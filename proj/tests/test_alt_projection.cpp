#include <doctest.h>

#include <random>

#include "conbandit/alt_projection.hpp"
#include "test_util.hpp"

using namespace conbandit;

TEST_CASE("gaussian closed form matches the numeric dual search") {
  std::mt19937 gen(31);
  int checked = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const auto prob = testutil::randomGaussianProblem(gen, 6, 3);
    const auto opt = solve_optimal_policy(prob.instance.means, prob.polytope);
    const auto nbrs = enumerate_neighbors(opt, prob.polytope);
    const VectorXd w =
        testutil::randomAllocation(gen, prob.polytope.numArms());
    for (const auto& nb : nbrs.neighbors) {
      const auto closed =
          project_gaussian(w, prob.instance.means, opt, nb.vertex,
                           prob.instance.domain, 1.0);
      const auto numeric =
          project_numeric(w, prob.instance.means, opt, nb.vertex,
                          prob.instance.family, prob.instance.domain);
      CHECK(std::abs(closed.value - numeric.value) <= 1e-6);
      const VectorXd v = opt.pi - nb.vertex.pi;
      if (closed.value > 0.0) {
        CHECK(std::abs(closed.lambda.dot(v)) <= 1e-8);
        CHECK(std::abs(numeric.lambda.dot(v)) <= 1e-8);
      }
      ++checked;
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("gaussian closed-form value equals the analytic ratio") {
  // value = (mu^T v)^2 / (2 sigma^2 sum_a v_a^2 / w_a), per neighbor.
  std::mt19937 gen(37);
  for (int rep = 0; rep < 30; ++rep) {
    const auto prob = testutil::randomGaussianProblem(gen, 5, 2);
    const auto opt = solve_optimal_policy(prob.instance.means, prob.polytope);
    const VectorXd w =
        testutil::randomAllocation(gen, prob.polytope.numArms());
    for (const auto& nb :
         enumerate_neighbors(opt, prob.polytope).neighbors) {
      const VectorXd v = opt.pi - nb.vertex.pi;
      const double gap = prob.instance.means.dot(v);
      if (gap <= 0.0) continue;
      double s = 0.0;
      for (int a = 0; a < v.size(); ++a) {
        if (std::abs(v[a]) > 1e-12) s += v[a] * v[a] / w[a];
      }
      const double expected = gap * gap / (2.0 * s);
      const auto r = project_gaussian(w, prob.instance.means, opt, nb.vertex,
                                      prob.instance.domain, 1.0);
      CHECK(r.value == doctest::Approx(expected).epsilon(1e-8));
    }
  }
}

namespace {

// Dense grid search over the hyperplane lambda^T v = 0 for K = 3: two free
// coordinates on a grid, the third solved from the hyperplane when v_3 != 0.
double gridOracle(const VectorXd& w, const VectorXd& means, const VectorXd& v,
                  const RewardFamily& family, const MeanDomain& domain,
                  double lo, double hi, double step) {
  int pivot = 0;
  for (int a = 1; a < 3; ++a) {
    if (std::abs(v[a]) > std::abs(v[pivot])) pivot = a;
  }
  const int i = (pivot + 1) % 3, j = (pivot + 2) % 3;
  double best = 1e300;
  for (double x = lo; x <= hi; x += step) {
    for (double y = lo; y <= hi; y += step) {
      const double z = -(v[i] * x + v[j] * y) / v[pivot];
      if (z < domain.lo || z > domain.hi) continue;
      VectorXd lambda(3);
      lambda[i] = x;
      lambda[j] = y;
      lambda[pivot] = z;
      double val = 0.0;
      for (int a = 0; a < 3; ++a) val += w[a] * kl(family, means[a], lambda[a]);
      best = std::min(best, val);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("projection value matches a dense lambda grid (K = 3)") {
  SUBCASE("gaussian") {
    MatrixXd extra(1, 3);
    extra << 1.0, 1.0, 0.0;
    VectorXd ec(1);
    ec << 0.6;
    const auto poly = FeasiblePolytope::fromConstraints(3, extra, ec);
    VectorXd means(3);
    means << 1.0, 0.4, 0.1;
    const MeanDomain dom{-2.0, 2.0};
    VectorXd w(3);
    w << 0.5, 0.3, 0.2;

    const auto opt = solve_optimal_policy(means, poly);
    for (const auto& nb : enumerate_neighbors(opt, poly).neighbors) {
      const VectorXd v = opt.pi - nb.vertex.pi;
      if (means.dot(v) <= 0.0) continue;
      const auto r = project_gaussian(w, means, opt, nb.vertex, dom, 1.0);
      const double grid = gridOracle(w, means, v, RewardFamily::gaussian(1.0),
                                     dom, -2.0, 2.0, 0.002);
      CHECK(r.value <= grid + 1e-9);           // true minimum beats the grid
      CHECK(grid <= r.value + 5e-3 * (1 + r.value));  // grid gets close
    }
  }

  SUBCASE("bernoulli") {
    const auto poly = FeasiblePolytope::simplexOnly(3);
    VectorXd means(3);
    means << 0.8, 0.5, 0.3;
    const MeanDomain dom{0.01, 0.99};
    VectorXd w(3);
    w << 0.4, 0.4, 0.2;
    const auto fam = RewardFamily::bernoulli();

    const auto opt = solve_optimal_policy(means, poly);
    for (const auto& nb : enumerate_neighbors(opt, poly).neighbors) {
      const VectorXd v = opt.pi - nb.vertex.pi;
      if (means.dot(v) <= 0.0) continue;
      const auto r = project_numeric(w, means, opt, nb.vertex, fam, dom);
      const double grid =
          gridOracle(w, means, v, fam, dom, 0.01, 0.99, 0.001);
      CHECK(r.value <= grid + 1e-9);
      CHECK(grid <= r.value + 5e-3 * (1 + r.value));
    }
  }
}

TEST_CASE("zero gap and degenerate weights") {
  const auto poly = FeasiblePolytope::simplexOnly(3);
  VectorXd means(3);
  means << 1.0, 0.5, 0.0;
  const MeanDomain dom{-2.0, 2.0};
  const auto opt = solve_optimal_policy(means, poly);
  const auto nbrs = enumerate_neighbors(opt, poly);
  REQUIRE(!nbrs.neighbors.empty());
  const auto& nb = nbrs.neighbors.front().vertex;

  SUBCASE("gap <= 0 gives value 0 with lambda = means") {
    VectorXd flipped = -means;
    VectorXd w(3);
    w << 0.4, 0.3, 0.3;
    const auto r = project_gaussian(w, flipped, opt, nb, dom, 1.0);
    CHECK(r.value == 0.0);
    CHECK((r.lambda - flipped).lpNorm<Eigen::Infinity>() == 0.0);
  }

  SUBCASE("zero weight on a support coordinate flags degeneracy") {
    VectorXd w = VectorXd::Zero(3);
    // Put all the mass off the hyperplane support.
    const VectorXd v = opt.pi - nb.pi;
    for (int a = 0; a < 3; ++a) {
      if (std::abs(v[a]) <= 1e-12) w[a] = 1.0;
    }
    if (w.sum() == 0.0) {
      w.setZero();
      w[2] = 1.0;
    }
    w /= w.sum();
    bool support_zeroed = false;
    for (int a = 0; a < 3; ++a) {
      if (std::abs(v[a]) > 1e-12 && w[a] < 1e-15) support_zeroed = true;
    }
    if (support_zeroed) {
      const auto r = project_gaussian(w, means, opt, nb, dom, 1.0);
      CHECK(r.value == 0.0);
      CHECK(r.degenerate_weights);
    }
  }
}

TEST_CASE("box-constrained projection stays inside the domain") {
  // Tight box forces clipping; the numeric path must keep lambda in the box
  // and the value finite.
  const auto poly = FeasiblePolytope::simplexOnly(2);
  VectorXd means(2);
  means << 0.9, -0.9;
  const MeanDomain dom{-1.0, 1.0};
  VectorXd w(2);
  w << 0.99, 0.01;
  const auto opt = solve_optimal_policy(means, poly);
  const auto nbrs = enumerate_neighbors(opt, poly);
  REQUIRE(!nbrs.neighbors.empty());
  const auto r = project_neighbor(w, means, opt, nbrs.neighbors.front().vertex,
                                  RewardFamily::gaussian(1.0), dom);
  CHECK(r.lambda.minCoeff() >= dom.lo - 1e-12);
  CHECK(r.lambda.maxCoeff() <= dom.hi + 1e-12);
  CHECK(r.value > 0.0);
  CHECK(std::isfinite(r.value));
}

TEST_CASE("alt_value tie handling and cache consistency") {
  const auto poly = FeasiblePolytope::simplexOnly(3);
  const MeanDomain dom{-2.0, 2.0};
  const auto fam = RewardFamily::gaussian(1.0);
  VectorXd w(3);
  w << 0.4, 0.3, 0.3;

  SUBCASE("tied optimum throws unless tolerated") {
    VectorXd tied(3);
    tied << 1.0, 1.0, 0.0;
    CHECK_THROWS(alt_value(w, tied, poly, fam, dom));
    const auto r = alt_value(w, tied, poly, fam, dom, /*tolerate_ties=*/true);
    CHECK(r.value == 0.0);
  }

  SUBCASE("cache returns the same result") {
    VectorXd means(3);
    means << 1.0, 0.5, 0.2;
    NeighborCache cache;
    const auto direct = alt_value(w, means, poly, fam, dom);
    const auto cached1 = alt_value(w, means, poly, fam, dom, false, &cache);
    const auto cached2 = alt_value(w, means, poly, fam, dom, false, &cache);
    CHECK(direct.value == doctest::Approx(cached1.value).epsilon(1e-12));
    CHECK(cached1.value == doctest::Approx(cached2.value).epsilon(1e-12));
  }
}

TEST_CASE("alt_value is the minimum over neighbors") {
  std::mt19937 gen(41);
  for (int rep = 0; rep < 20; ++rep) {
    const auto prob = testutil::randomGaussianProblem(gen, 5, 2);
    const auto opt = solve_optimal_policy(prob.instance.means, prob.polytope);
    const auto nbrs = enumerate_neighbors(opt, prob.polytope);
    const VectorXd w = testutil::randomAllocation(gen, prob.polytope.numArms());

    double expected = 1e300;
    for (const auto& nb : nbrs.neighbors) {
      expected = std::min(
          expected, project_gaussian(w, prob.instance.means, opt, nb.vertex,
                                     prob.instance.domain, 1.0)
                        .value);
    }
    const auto r = alt_value(w, prob.instance.means, prob.polytope,
                             prob.instance.family, prob.instance.domain);
    CHECK(r.value == doctest::Approx(expected).epsilon(1e-10));
  }
}
