#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace conbandit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class FamilyKind { Gaussian, Bernoulli };

// One-parameter reward family shared by all arms. Gaussian arms share sigma.
struct RewardFamily {
  FamilyKind kind = FamilyKind::Gaussian;
  double sigma = 1.0;

  static RewardFamily gaussian(double sigma);
  static RewardFamily bernoulli();
};

// Closed box the mean vector is known to live in.
struct MeanDomain {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double clip(double x) const { return std::min(hi, std::max(lo, x)); }
};

struct BanditInstance {
  VectorXd means;
  RewardFamily family;
  MeanDomain domain;

  int numArms() const { return static_cast<int>(means.size()); }
};

enum class Scenario { EndOfTime, Anytime };

// Feasible policy polytope F = {pi : B pi <= c}, with the simplex constraints
// materialized as explicit rows. Row layout is fixed:
//   row 0:        sum(pi) <= 1
//   row 1:       -sum(pi) <= -1
//   rows 2..K+1: -pi_a    <= 0
//   rows K+2..:  user constraints
// All rows are L2-normalized (c scaled to match).
class FeasiblePolytope {
 public:
  static constexpr double kFeasTol = 1e-9;

  // Empty (0-arm, infeasible) placeholder; assign a factory result before use.
  FeasiblePolytope() = default;

  // Builds from the user's extra constraints (may have zero rows).
  // Feasibility is probed with one LP solve; the result is recorded, not
  // thrown, so that validation can report it.
  static FeasiblePolytope fromConstraints(int num_arms, const MatrixXd& extra_B,
                                          const VectorXd& extra_c);
  static FeasiblePolytope simplexOnly(int num_arms);

  int numArms() const { return num_arms_; }
  int numRows() const { return static_cast<int>(B_.rows()); }
  int numExtraRows() const { return numRows() - (num_arms_ + 2); }

  const MatrixXd& B() const { return B_; }
  const VectorXd& c() const { return c_; }
  // Un-normalized user rows, for serialization.
  MatrixXd extraB() const;
  VectorXd extraC() const;

  bool feasible() const { return feasible_; }
  // A point inside F found by the construction-time LP (valid iff feasible()).
  const VectorXd& interiorPoint() const { return feasible_point_; }

  bool isFeasible(const VectorXd& pi, double tol = kFeasTol) const;
  // max_i (B pi - c)_i, ignoring the simplex equality rows.
  double maxViolation(const VectorXd& pi) const;

  bool isSimplexOnly() const { return numExtraRows() == 0; }

 private:
  int num_arms_ = 0;
  MatrixXd B_;
  VectorXd c_;
  VectorXd row_scale_;  // L2 norm of each raw row, for de-normalization
  bool feasible_ = false;
  VectorXd feasible_point_;
};

// Extreme point of F with K active, linearly independent rows of B.
struct VertexPolicy {
  VectorXd pi;
  std::vector<int> basis;  // row indices into FeasiblePolytope::B(), sorted

  // ||B_basis pi - c_basis||_inf
  double basisResidual(const FeasiblePolytope& poly) const;
};

// Exploration allocation; nonnegative, sums to one.
struct Allocation {
  VectorXd w;
};

struct ValidationReport {
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

// Checks instance + polytope invariants and Assumption 3 (unique optimum).
// Reports problems instead of throwing.
ValidationReport validate_instance(const BanditInstance& instance,
                                   const FeasiblePolytope& polytope);

// Coordinatewise clip of raw means to the domain box.
VectorXd projection_onto_domain(const VectorXd& raw_means, const MeanDomain& domain);

// JSON document {"means": ..., "family": ..., "domain": ..., "constraints":
// {"B": ..., "c": ...}, "scenario": ...}.
struct ProblemSpec {
  BanditInstance instance;
  FeasiblePolytope polytope;
  Scenario scenario = Scenario::Anytime;
};

nlohmann::json problemToJson(const ProblemSpec& spec);
ProblemSpec problemFromJson(const nlohmann::json& doc);

const char* toString(Scenario s);
const char* toString(FamilyKind k);

}  // namespace conbandit
