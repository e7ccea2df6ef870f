#pragma once

#include <utility>

#include "conbandit/model.hpp"

namespace conbandit {

// KL divergence between two family members with means x, y.
// Gaussian: (x-y)^2 / (2 sigma^2).
// Bernoulli: x ln(x/y) + (1-x) ln((1-x)/(1-y)), with 0 ln 0 = 0 and an
// infinity sentinel when y hits {0,1} while x differs.
double kl(const RewardFamily& family, double x, double y);

// d/dy kl(x, y); strictly increasing in y, zero at y = x.
double klDerivative(const RewardFamily& family, double x, double y);

// Bernoulli KL between probabilities p, q in (0,1). Throws on out-of-range.
double binary_kl(double p, double q);

// Endpoints of {xi : count * kl(mean_hat, xi) <= radius}, clipped to the
// domain. Gaussian has the closed form mean_hat +/- sqrt(2 sigma^2 r / n);
// Bernoulli endpoints are found by bisection to |kl - radius/count| <= 1e-12.
std::pair<double, double> confidence_interval(const RewardFamily& family,
                                              const MeanDomain& domain,
                                              double mean_hat, long count,
                                              double radius);

}  // namespace conbandit
