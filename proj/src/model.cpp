#include "conbandit/model.hpp"

#include <cmath>
#include <json.hpp>

#include "conbandit/polytope.hpp"
#include "simplex_lp.hpp"

namespace conbandit {

RewardFamily RewardFamily::gaussian(double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("Gaussian sigma must be > 0");
  return RewardFamily{FamilyKind::Gaussian, sigma};
}

RewardFamily RewardFamily::bernoulli() {
  return RewardFamily{FamilyKind::Bernoulli, 0.0};
}

FeasiblePolytope FeasiblePolytope::fromConstraints(int num_arms,
                                                   const MatrixXd& extra_B,
                                                   const VectorXd& extra_c) {
  if (num_arms < 2) throw std::invalid_argument("need at least 2 arms");
  const int ne = static_cast<int>(extra_B.rows());
  if (ne > 0 && extra_B.cols() != num_arms) {
    throw std::invalid_argument("constraint matrix width != num arms");
  }

  FeasiblePolytope p;
  p.num_arms_ = num_arms;
  const int rows = num_arms + 2 + ne;
  p.B_ = MatrixXd::Zero(rows, num_arms);
  p.c_ = VectorXd::Zero(rows);
  p.B_.row(0).setOnes();
  p.c_[0] = 1.0;
  p.B_.row(1).setConstant(-1.0);
  p.c_[1] = -1.0;
  for (int a = 0; a < num_arms; ++a) {
    p.B_(2 + a, a) = -1.0;
    p.c_[2 + a] = 0.0;
  }
  if (ne > 0) {
    p.B_.bottomRows(ne) = extra_B;
    p.c_.tail(ne) = extra_c;
  }
  p.row_scale_ = VectorXd::Ones(rows);
  for (int i = 0; i < rows; ++i) {
    const double nrm = p.B_.row(i).norm();
    if (nrm < 1e-14) throw std::invalid_argument("zero constraint row");
    p.row_scale_[i] = nrm;
    p.B_.row(i) /= nrm;
    p.c_[i] /= nrm;
  }

  // Feasibility probe: find pi >= 0 with sum pi = 1 and extra_B pi + s = extra_c.
  const int nv = num_arms + ne;
  MatrixXd A = MatrixXd::Zero(1 + ne, nv);
  VectorXd b = VectorXd::Zero(1 + ne);
  A.row(0).head(num_arms).setOnes();
  b[0] = 1.0;
  if (ne > 0) {
    A.bottomRows(ne).leftCols(num_arms) = extra_B;
    A.bottomRightCorner(ne, ne).setIdentity();
    b.tail(ne) = extra_c;
  }
  auto lp = detail::solveStandardFormLp(A, b, VectorXd::Zero(nv));
  p.feasible_ = lp.feasible;
  if (lp.feasible) p.feasible_point_ = lp.x.head(num_arms);
  return p;
}

FeasiblePolytope FeasiblePolytope::simplexOnly(int num_arms) {
  return fromConstraints(num_arms, MatrixXd(0, num_arms), VectorXd(0));
}

MatrixXd FeasiblePolytope::extraB() const {
  const int ne = numExtraRows();
  MatrixXd out(ne, num_arms_);
  for (int i = 0; i < ne; ++i) {
    const int r = num_arms_ + 2 + i;
    out.row(i) = B_.row(r) * row_scale_[r];
  }
  return out;
}

VectorXd FeasiblePolytope::extraC() const {
  const int ne = numExtraRows();
  VectorXd out(ne);
  for (int i = 0; i < ne; ++i) {
    const int r = num_arms_ + 2 + i;
    out[i] = c_[r] * row_scale_[r];
  }
  return out;
}

bool FeasiblePolytope::isFeasible(const VectorXd& pi, double tol) const {
  if (pi.size() != num_arms_) return false;
  return ((B_ * pi - c_).array() <= tol).all();
}

double FeasiblePolytope::maxViolation(const VectorXd& pi) const {
  return (B_ * pi - c_).maxCoeff();
}

double VertexPolicy::basisResidual(const FeasiblePolytope& poly) const {
  double r = 0.0;
  for (int row : basis) {
    r = std::max(r, std::abs(poly.B().row(row).dot(pi) - poly.c()[row]));
  }
  return r;
}

VectorXd projection_onto_domain(const VectorXd& raw_means, const MeanDomain& domain) {
  return raw_means.array().min(domain.hi).max(domain.lo);
}

ValidationReport validate_instance(const BanditInstance& instance,
                                   const FeasiblePolytope& polytope) {
  ValidationReport rep;
  const int K = instance.numArms();
  if (K < 2) rep.problems.push_back("need at least 2 arms");
  if (instance.domain.lo >= instance.domain.hi) {
    rep.problems.push_back("empty mean domain");
  }
  if (instance.family.kind == FamilyKind::Gaussian && instance.family.sigma <= 0.0) {
    rep.problems.push_back("Gaussian sigma must be positive");
  }
  if (instance.family.kind == FamilyKind::Bernoulli &&
      (instance.domain.lo <= 0.0 || instance.domain.hi >= 1.0)) {
    rep.problems.push_back("Bernoulli mean domain must be a subset of (0,1)");
  }
  for (int a = 0; a < K; ++a) {
    if (!instance.domain.contains(instance.means[a])) {
      rep.problems.push_back("mean of arm " + std::to_string(a) + " outside domain");
    }
  }
  if (polytope.numArms() != K) {
    rep.problems.push_back("polytope arm count mismatch");
    return rep;
  }
  if (!polytope.feasible()) {
    rep.problems.push_back("infeasible region");
    return rep;
  }
  // Assumption 3: the LP optimum is unique iff every neighbor of the optimal
  // vertex has a strictly positive reward gap.
  try {
    const VertexPolicy opt = solve_optimal_policy(instance.means, polytope);
    const NeighborSet nbrs = enumerate_neighbors(opt, polytope);
    for (const auto& nb : nbrs.neighbors) {
      if (instance.means.dot(opt.pi - nb.vertex.pi) <= 1e-9) {
        rep.problems.push_back("optimum not unique");
        break;
      }
    }
  } catch (const std::exception& e) {
    rep.problems.push_back(std::string("degenerate optimum: ") + e.what());
  }
  return rep;
}

const char* toString(Scenario s) {
  return s == Scenario::Anytime ? "anytime" : "end_of_time";
}

const char* toString(FamilyKind k) {
  return k == FamilyKind::Gaussian ? "gaussian" : "bernoulli";
}

nlohmann::json problemToJson(const ProblemSpec& spec) {
  nlohmann::json doc;
  doc["means"] = std::vector<double>(spec.instance.means.begin(),
                                     spec.instance.means.end());
  doc["family"]["kind"] = toString(spec.instance.family.kind);
  if (spec.instance.family.kind == FamilyKind::Gaussian) {
    doc["family"]["sigma"] = spec.instance.family.sigma;
  }
  doc["domain"] = {spec.instance.domain.lo, spec.instance.domain.hi};
  const MatrixXd eb = spec.polytope.extraB();
  const VectorXd ec = spec.polytope.extraC();
  auto& cons = doc["constraints"];
  cons["B"] = nlohmann::json::array();
  for (int i = 0; i < eb.rows(); ++i) {
    cons["B"].push_back(std::vector<double>(eb.row(i).begin(), eb.row(i).end()));
  }
  cons["c"] = std::vector<double>(ec.begin(), ec.end());
  doc["scenario"] = toString(spec.scenario);
  return doc;
}

ProblemSpec problemFromJson(const nlohmann::json& doc) {
  ProblemSpec spec;
  const auto means = doc.at("means").get<std::vector<double>>();
  const int K = static_cast<int>(means.size());
  spec.instance.means = Eigen::Map<const VectorXd>(means.data(), K);

  const std::string kind = doc.at("family").at("kind").get<std::string>();
  if (kind == "gaussian") {
    spec.instance.family =
        RewardFamily::gaussian(doc.at("family").at("sigma").get<double>());
  } else if (kind == "bernoulli") {
    spec.instance.family = RewardFamily::bernoulli();
  } else {
    throw std::invalid_argument("unknown family kind: " + kind);
  }

  const auto dom = doc.at("domain").get<std::vector<double>>();
  if (dom.size() != 2) throw std::invalid_argument("domain must be [lo, hi]");
  spec.instance.domain = MeanDomain{dom[0], dom[1]};

  MatrixXd eb(0, K);
  VectorXd ec(0);
  if (doc.contains("constraints")) {
    const auto& cons = doc.at("constraints");
    const auto rows = cons.at("B").get<std::vector<std::vector<double>>>();
    const auto rhs = cons.at("c").get<std::vector<double>>();
    if (rows.size() != rhs.size()) {
      throw std::invalid_argument("constraints B and c size mismatch");
    }
    eb.resize(static_cast<int>(rows.size()), K);
    ec.resize(static_cast<int>(rhs.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<int>(rows[i].size()) != K) {
        throw std::invalid_argument("constraint row width mismatch");
      }
      eb.row(static_cast<int>(i)) =
          Eigen::Map<const VectorXd>(rows[i].data(), K);
      ec[static_cast<int>(i)] = rhs[i];
    }
  }
  spec.polytope = FeasiblePolytope::fromConstraints(K, eb, ec);

  const std::string scen = doc.value("scenario", std::string("anytime"));
  if (scen == "anytime") {
    spec.scenario = Scenario::Anytime;
  } else if (scen == "end_of_time") {
    spec.scenario = Scenario::EndOfTime;
  } else {
    throw std::invalid_argument("unknown scenario: " + scen);
  }
  return spec;
}

}  // namespace conbandit
