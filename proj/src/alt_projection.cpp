#include "conbandit/alt_projection.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace conbandit {

namespace {

constexpr double kGapTol = 1e-9;

// True if some hyperplane-support coordinate carries no sampling weight; the
// infimum of the weighted divergence is then 0 (convention).
bool degenerateWeights(const VectorXd& w, const VectorXd& v) {
  for (int a = 0; a < w.size(); ++a) {
    if (std::abs(v[a]) > 1e-12 && w[a] < 1e-15) return true;
  }
  return false;
}

ProjectionResult zeroResult(const VectorXd& means, const VertexPolicy& neighbor,
                            bool degenerate) {
  ProjectionResult r;
  r.value = 0.0;
  r.neighbor = neighbor;
  r.lambda = means;
  r.gamma = 0.0;
  r.degenerate_weights = degenerate;
  return r;
}

// Solves kl'(mu, lambda) = slope for lambda in the domain box. The derivative
// is strictly increasing in lambda, so the box-constrained minimizer of the
// per-coordinate convex Lagrangian is the clipped root.
double stationaryPoint(const RewardFamily& family, const MeanDomain& domain,
                       double mu, double slope) {
  if (family.kind == FamilyKind::Gaussian) {
    return domain.clip(mu + slope * family.sigma * family.sigma);
  }
  // Bernoulli: (lambda - mu) / (lambda (1 - lambda)) = s rearranges to the
  // quadratic s lambda^2 + (1 - s) lambda - mu = 0, whose unique root in
  // (0, 1) is 2 mu / ((1 - s) + sqrt((1 - s)^2 + 4 s mu)) (the stable form;
  // the denominator is positive for every real s).
  const double s = slope;
  if (s == 0.0) return domain.clip(mu);
  const double b = 1.0 - s;
  const double disc = std::sqrt(b * b + 4.0 * s * mu);
  return domain.clip(2.0 * mu / (b + disc));
}

VectorXd lambdaOfGamma(const RewardFamily& family, const MeanDomain& domain,
                       const VectorXd& w, const VectorXd& means,
                       const VectorXd& v, double gamma) {
  VectorXd lambda = means;
  for (int a = 0; a < means.size(); ++a) {
    if (std::abs(v[a]) <= 1e-12) continue;
    lambda[a] =
        stationaryPoint(family, domain, means[a], -gamma * v[a] / w[a]);
  }
  return lambda;
}

double weightedKl(const RewardFamily& family, const VectorXd& w,
                  const VectorXd& means, const VectorXd& lambda) {
  double s = 0.0;
  for (int a = 0; a < w.size(); ++a) {
    if (w[a] > 0.0) s += w[a] * kl(family, means[a], lambda[a]);
  }
  return s;
}

}  // namespace

ProjectionResult project_numeric(const VectorXd& w, const VectorXd& means,
                                 const VertexPolicy& optimal,
                                 const VertexPolicy& neighbor,
                                 const RewardFamily& family,
                                 const MeanDomain& domain) {
  const VectorXd v = optimal.pi - neighbor.pi;
  const double gap = means.dot(v);
  if (gap <= 0.0) return zeroResult(means, neighbor, false);
  if (degenerateWeights(w, v)) return zeroResult(means, neighbor, true);

  // residual(gamma) = lambda(gamma)^T v is nonincreasing, positive at 0 and
  // negative once every support coordinate is pushed to its far box edge, so
  // a sign change exists. Bracket by doubling, then bisect.
  auto residual = [&](double gamma) {
    return lambdaOfGamma(family, domain, w, means, v, gamma).dot(v);
  };
  double glo = 0.0, ghi = 1.0;
  int steps = 0;
  while (residual(ghi) > 0.0) {
    glo = ghi;
    ghi *= 2.0;
    if (++steps > 200 || ghi > 1e18) {
      std::ostringstream msg;
      msg << "project_numeric: no multiplier bracket, residual(" << ghi
          << ") = " << residual(ghi);
      throw std::runtime_error(msg.str());
    }
  }
  double gamma = ghi, res = 0.0;
  for (steps = 0; steps < 200; ++steps) {
    gamma = 0.5 * (glo + ghi);
    res = residual(gamma);
    if (std::abs(res) <= 1e-9) break;
    if (res > 0.0) {
      glo = gamma;
    } else {
      ghi = gamma;
    }
  }
  if (std::abs(res) > 1e-9) {
    // Box-pinned coordinates can make the residual jump across zero; accept
    // the bracket midpoint only if the jump is tiny, else report.
    res = residual(gamma);
    if (std::abs(res) > 1e-6) {
      std::ostringstream msg;
      msg << "project_numeric: bisection stalled, gamma=" << gamma
          << " residual=" << res;
      throw std::runtime_error(msg.str());
    }
  }

  ProjectionResult r;
  r.lambda = lambdaOfGamma(family, domain, w, means, v, gamma);
  r.value = weightedKl(family, w, means, r.lambda);
  r.neighbor = neighbor;
  r.gamma = gamma;
  return r;
}

ProjectionResult project_gaussian(const VectorXd& w, const VectorXd& means,
                                  const VertexPolicy& optimal,
                                  const VertexPolicy& neighbor,
                                  const MeanDomain& domain, double sigma) {
  const VectorXd v = optimal.pi - neighbor.pi;
  const double gap = means.dot(v);
  if (gap <= 0.0) return zeroResult(means, neighbor, false);
  if (degenerateWeights(w, v)) return zeroResult(means, neighbor, true);

  double s = 0.0;
  for (int a = 0; a < w.size(); ++a) {
    if (std::abs(v[a]) > 1e-12) s += v[a] * v[a] / w[a];
  }
  const double gamma = gap / s;
  VectorXd lambda = means;
  for (int a = 0; a < w.size(); ++a) {
    if (std::abs(v[a]) > 1e-12) lambda[a] = means[a] - gamma * v[a] / w[a];
  }

  const RewardFamily family = RewardFamily::gaussian(sigma);
  VectorXd clipped = lambda.array().min(domain.hi).max(domain.lo);
  if (std::abs(clipped.dot(v)) > 1e-6) {
    // Unconstrained minimizer leaves the box: fall back to the numeric path,
    // which handles active box constraints.
    return project_numeric(w, means, optimal, neighbor, family, domain);
  }

  ProjectionResult r;
  r.lambda = clipped;
  r.value = weightedKl(family, w, means, r.lambda);
  r.neighbor = neighbor;
  r.gamma = gamma;
  return r;
}

ProjectionResult project_neighbor(const VectorXd& w, const VectorXd& means,
                                  const VertexPolicy& optimal,
                                  const VertexPolicy& neighbor,
                                  const RewardFamily& family,
                                  const MeanDomain& domain) {
  return family.kind == FamilyKind::Gaussian
             ? project_gaussian(w, means, optimal, neighbor, domain,
                                family.sigma)
             : project_numeric(w, means, optimal, neighbor, family, domain);
}

const NeighborSet& NeighborCache::get(const VertexPolicy& optimal,
                                      const FeasiblePolytope& polytope) {
  std::string key;
  for (int row : optimal.basis) key += std::to_string(row) + ",";
  auto it = by_basis_.find(key);
  if (it == by_basis_.end()) {
    it = by_basis_.emplace(key, enumerate_neighbors(optimal, polytope)).first;
  }
  return it->second;
}

ProjectionResult alt_value(const VectorXd& w, const VectorXd& means,
                           const FeasiblePolytope& polytope,
                           const RewardFamily& family, const MeanDomain& domain,
                           bool tolerate_ties, NeighborCache* cache) {
  const VertexPolicy optimal = solve_optimal_policy(means, polytope);
  NeighborSet local;
  const NeighborSet& nbrs =
      cache ? cache->get(optimal, polytope)
            : (local = enumerate_neighbors(optimal, polytope), local);

  bool found = false;
  ProjectionResult best;
  for (const auto& entry : nbrs.neighbors) {
    const double gap = means.dot(optimal.pi - entry.vertex.pi);
    if (gap <= kGapTol) {
      if (!tolerate_ties) {
        throw std::runtime_error("alt_value: optimum not unique at these means");
      }
      return zeroResult(means, entry.vertex, false);
    }
    ProjectionResult r =
        family.kind == FamilyKind::Gaussian
            ? project_gaussian(w, means, optimal, entry.vertex, domain,
                               family.sigma)
            : project_numeric(w, means, optimal, entry.vertex, family, domain);
    if (!found || r.value < best.value) {
      best = std::move(r);
      found = true;
    }
  }
  if (!found) {
    throw std::runtime_error("alt_value: optimal vertex has no neighbors");
  }
  return best;
}

}  // namespace conbandit
