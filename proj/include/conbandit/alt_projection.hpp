#pragma once

#include <unordered_map>

#include "conbandit/divergences.hpp"
#include "conbandit/polytope.hpp"

namespace conbandit {

// Weighted information projection of `means` onto the half-space where a
// neighbor vertex beats the optimum, i.e. onto the hyperplane
// lambda^T (pi* - pi') = 0.
struct ProjectionResult {
  double value = 0.0;       // sum_a w_a kl(mu_a, lambda_a) at the minimizer
  VertexPolicy neighbor;    // argmin neighbor
  VectorXd lambda;          // confusing instance
  double gamma = 0.0;       // hyperplane multiplier (Gaussian closed form)
  bool degenerate_weights = false;  // some w_a = 0 on the hyperplane support
};

// Gaussian closed form: lambda_a = mu_a - gamma (pi*-pi')_a / w_a with
// gamma = mu^T v / sum_a v_a^2 / w_a, v = pi* - pi'. If mu^T v <= 0 the means
// already sit in the half-space and the value is 0. Zero weight on a
// coordinate with v_a != 0 makes the infimum 0 (flagged degenerate). If the
// unconstrained minimizer leaves the domain box, the numeric path re-solves
// with the box active.
ProjectionResult project_gaussian(const VectorXd& w, const VectorXd& means,
                                  const VertexPolicy& optimal,
                                  const VertexPolicy& neighbor,
                                  const MeanDomain& domain, double sigma);

// Same projection by 1-D dual bisection on gamma (each lambda_a(gamma) found
// by safeguarded per-coordinate root finding on the stationarity condition,
// box constraints handled by clipping). Works for any family; it is the
// primary path for Bernoulli and the cross-check for Gaussian.
ProjectionResult project_numeric(const VectorXd& w, const VectorXd& means,
                                 const VertexPolicy& optimal,
                                 const VertexPolicy& neighbor,
                                 const RewardFamily& family,
                                 const MeanDomain& domain);

// Family dispatch: Gaussian closed form, numeric dual search otherwise.
ProjectionResult project_neighbor(const VectorXd& w, const VectorXd& means,
                                  const VertexPolicy& optimal,
                                  const VertexPolicy& neighbor,
                                  const RewardFamily& family,
                                  const MeanDomain& domain);

// Memoizes neighbor sets per optimal basis so repeated solves at slowly
// drifting means reuse the enumeration. Single-run state; not thread-safe.
class NeighborCache {
 public:
  const NeighborSet& get(const VertexPolicy& optimal,
                         const FeasiblePolytope& polytope);

 private:
  std::unordered_map<std::string, NeighborSet> by_basis_;
};

// D(w, mu, F): minimum over neighbors of the optimal vertex of the projection
// value. Throws if the optimum is not unique (some neighbor ties).
// `tolerate_ties = true` instead returns value 0 with that neighbor, which is
// what the stopping statistic needs for transiently tied empirical means.
ProjectionResult alt_value(const VectorXd& w, const VectorXd& means,
                           const FeasiblePolytope& polytope,
                           const RewardFamily& family, const MeanDomain& domain,
                           bool tolerate_ties = false,
                           NeighborCache* cache = nullptr);

}  // namespace conbandit
