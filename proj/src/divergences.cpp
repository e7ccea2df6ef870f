#include "conbandit/divergences.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace conbandit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double bernoulliKl(double x, double y) {
  if (x == y) return 0.0;
  if (y <= 0.0 || y >= 1.0) return kInf;
  double s = 0.0;
  if (x > 0.0) s += x * std::log(x / y);
  if (x < 1.0) s += (1.0 - x) * std::log((1.0 - x) / (1.0 - y));
  return s;
}
}  // namespace

double kl(const RewardFamily& family, double x, double y) {
  if (family.kind == FamilyKind::Gaussian) {
    const double d = x - y;
    return d * d / (2.0 * family.sigma * family.sigma);
  }
  return bernoulliKl(x, y);
}

double klDerivative(const RewardFamily& family, double x, double y) {
  if (family.kind == FamilyKind::Gaussian) {
    return (y - x) / (family.sigma * family.sigma);
  }
  return (y - x) / (y * (1.0 - y));
}

double binary_kl(double p, double q) {
  if (p <= 0.0 || p >= 1.0 || q <= 0.0 || q >= 1.0) {
    throw std::invalid_argument("binary_kl: arguments must lie in (0,1)");
  }
  return bernoulliKl(p, q);
}

std::pair<double, double> confidence_interval(const RewardFamily& family,
                                              const MeanDomain& domain,
                                              double mean_hat, long count,
                                              double radius) {
  if (count < 1) throw std::invalid_argument("confidence_interval: count < 1");
  if (radius < 0.0) throw std::invalid_argument("confidence_interval: radius < 0");
  if (radius == 0.0) return {mean_hat, mean_hat};
  const double level = radius / static_cast<double>(count);

  if (family.kind == FamilyKind::Gaussian) {
    const double half = std::sqrt(2.0 * family.sigma * family.sigma * level);
    return {domain.clip(mean_hat - half), domain.clip(mean_hat + half)};
  }

  // Bernoulli: kl(mean_hat, .) is decreasing left of mean_hat and increasing
  // right of it, so each endpoint is a 1-D bisection.
  auto bisect = [&](double lo, double hi, bool increasing) {
    // invariant: kl(mean_hat, lo) and kl(mean_hat, hi) bracket `level`
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double v = bernoulliKl(mean_hat, mid);
      if (std::abs(v - level) <= 1e-12) return mid;
      const bool above = v > level;
      if (increasing == above) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return 0.5 * (lo + hi);
  };

  double alpha = domain.lo;
  if (bernoulliKl(mean_hat, domain.lo) > level) {
    alpha = bisect(domain.lo, mean_hat, /*increasing=*/false);
  }
  double beta = domain.hi;
  if (bernoulliKl(mean_hat, domain.hi) > level) {
    beta = bisect(mean_hat, domain.hi, /*increasing=*/true);
  }
  return {alpha, beta};
}

}  // namespace conbandit
