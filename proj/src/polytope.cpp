#include "conbandit/polytope.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "simplex_lp.hpp"

namespace conbandit {

namespace {

constexpr double kActiveTol = 1e-9;
constexpr double kIndepTol = 1e-10;

double smallestSingularValue(const MatrixXd& m) {
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return svd.singularValues().minCoeff();
}

// Greedily selects rows (in index order) whose span grows, via modified
// Gram-Schmidt. Returns up to `want` indices.
std::vector<int> greedyIndependentRows(const MatrixXd& B,
                                       const std::vector<int>& candidates,
                                       int want) {
  std::vector<int> chosen;
  std::vector<VectorXd> ortho;
  for (int idx : candidates) {
    if (static_cast<int>(chosen.size()) == want) break;
    VectorXd v = B.row(idx).transpose();
    for (const auto& q : ortho) v -= q.dot(v) * q;
    if (v.norm() > 1e-8) {
      v.normalize();
      ortho.push_back(v);
      chosen.push_back(idx);
    }
  }
  return chosen;
}

std::vector<int> activeRows(const VectorXd& pi, const FeasiblePolytope& poly) {
  std::vector<int> rows;
  for (int i = 0; i < poly.numRows(); ++i) {
    if (std::abs(poly.B().row(i).dot(pi) - poly.c()[i]) <= kActiveTol) {
      rows.push_back(i);
    }
  }
  return rows;
}

// All K-subsets of `rows` spanning R^K, found by depth-first selection with
// incremental Gram-Schmidt pruning.
void independentBases(const MatrixXd& B, const std::vector<int>& rows, int K,
                      std::vector<std::vector<int>>& out) {
  std::vector<int> current;
  std::vector<VectorXd> ortho;
  long budget = 500000;

  auto rec = [&](auto&& self, size_t from) -> void {
    if (--budget < 0) throw std::runtime_error("degenerate vertex: too many active bases");
    if (static_cast<int>(current.size()) == K) {
      out.push_back(current);
      return;
    }
    const int need = K - static_cast<int>(current.size());
    for (size_t i = from; i + need <= rows.size(); ++i) {
      VectorXd v = B.row(rows[i]).transpose();
      for (const auto& q : ortho) v -= q.dot(v) * q;
      if (v.norm() <= 1e-8) continue;
      v.normalize();
      ortho.push_back(v);
      current.push_back(rows[i]);
      self(self, i + 1);
      current.pop_back();
      ortho.pop_back();
    }
  };
  rec(rec, 0);
}

}  // namespace

VertexPolicy solve_optimal_policy(const VectorXd& means,
                                  const FeasiblePolytope& polytope) {
  if (!polytope.feasible()) {
    throw std::runtime_error("solve_optimal_policy: infeasible polytope");
  }
  const int K = polytope.numArms();
  const int ne = polytope.numExtraRows();
  const MatrixXd eb = polytope.extraB();
  const VectorXd ec = polytope.extraC();

  const int nv = K + ne;
  MatrixXd A = MatrixXd::Zero(1 + ne, nv);
  VectorXd b = VectorXd::Zero(1 + ne);
  A.row(0).head(K).setOnes();
  b[0] = 1.0;
  if (ne > 0) {
    A.bottomRows(ne).leftCols(K) = eb;
    A.bottomRightCorner(ne, ne).setIdentity();
    b.tail(ne) = ec;
  }
  VectorXd obj = VectorXd::Zero(nv);
  obj.head(K) = means;
  auto lp = detail::solveStandardFormLp(A, b, obj);
  if (!lp.feasible) {
    throw std::runtime_error("solve_optimal_policy: infeasible polytope");
  }

  VertexPolicy v;
  v.pi = lp.x.head(K);
  v.basis = greedyIndependentRows(polytope.B(), activeRows(v.pi, polytope), K);
  if (static_cast<int>(v.basis.size()) != K) {
    throw std::runtime_error("solve_optimal_policy: optimum is not a vertex");
  }
  return v;
}

NeighborSet enumerate_neighbors(const VertexPolicy& vertex,
                                const FeasiblePolytope& polytope) {
  const int K = polytope.numArms();
  const MatrixXd& B = polytope.B();
  const VectorXd& c = polytope.c();

  {
    MatrixXd basisMat(K, K);
    for (int i = 0; i < K; ++i) basisMat.row(i) = B.row(vertex.basis[i]);
    if (smallestSingularValue(basisMat) <= kIndepTol) {
      throw std::runtime_error("enumerate_neighbors: degenerate basis");
    }
  }

  const std::vector<int> active = activeRows(vertex.pi, polytope);
  std::vector<std::vector<int>> bases;
  if (static_cast<int>(active.size()) == K) {
    bases.push_back(active);
  } else {
    independentBases(B, active, K, bases);
  }

  NeighborSet out;
  out.origin = vertex;

  auto alreadyHave = [&](const VectorXd& pi) {
    if ((pi - vertex.pi).lpNorm<Eigen::Infinity>() <= kActiveTol) return true;
    for (const auto& nb : out.neighbors) {
      if ((pi - nb.vertex.pi).lpNorm<Eigen::Infinity>() <= kActiveTol) return true;
    }
    return false;
  };

  for (const auto& basis : bases) {
    MatrixXd bhat(K, K);
    for (int i = 0; i < K; ++i) bhat.row(i) = B.row(basis[i]);
    Eigen::PartialPivLU<MatrixXd> lu(bhat);

    for (int r = 0; r < K; ++r) {
      // Edge direction: keep the other K-1 rows active, relax row r.
      VectorXd rhs = VectorXd::Zero(K);
      rhs[r] = -1.0;
      const VectorXd dir = lu.solve(rhs);

      double step = -1.0;
      int blocking = -1;
      for (int i = 0; i < polytope.numRows(); ++i) {
        if (std::find(basis.begin(), basis.end(), i) != basis.end()) continue;
        const double gain = B.row(i).dot(dir);
        if (gain <= 1e-12) continue;
        const double slack = std::max(0.0, c[i] - B.row(i).dot(vertex.pi));
        const double t = slack / gain;
        if (blocking < 0 || t < step - 1e-12) {
          step = t;
          blocking = i;
        }
      }
      if (blocking < 0 || step <= 1e-10) continue;  // degenerate or no move

      VertexPolicy nb;
      nb.pi = vertex.pi + step * dir;
      if (alreadyHave(nb.pi)) continue;
      nb.basis.reserve(K);
      for (int i = 0; i < K; ++i) {
        nb.basis.push_back(i == r ? blocking : basis[i]);
      }
      std::sort(nb.basis.begin(), nb.basis.end());
      out.neighbors.push_back({std::move(nb), basis[r]});
    }
  }
  return out;
}

VectorXd project_to_simplex(const VectorXd& point, const VectorXd& lower) {
  const int K = static_cast<int>(point.size());
  VectorXd lb = lower.size() == K ? lower : VectorXd::Zero(K);
  const double budget = 1.0 - lb.sum();
  if (budget < -1e-12) {
    throw std::runtime_error("project_to_simplex: lower bounds exceed the simplex");
  }
  // Shifted problem: project z onto {y >= 0, sum y = budget}.
  VectorXd z = point - lb;
  std::vector<double> u(z.begin(), z.end());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (int i = 0; i < K; ++i) {
    cumsum += u[i];
    const double cand = (cumsum - budget) / (i + 1);
    if (i + 1 == K || u[i + 1] <= cand) {
      theta = cand;
      // only valid if u[i] > theta; the standard proof guarantees the first
      // such i is correct
      if (u[i] > cand || i + 1 == K) break;
    }
  }
  return lb + (z.array() - theta).max(0.0).matrix();
}

namespace {

struct WorkingSet {
  // Rows treated as equalities: the simplex equality plus working inequalities.
  std::vector<VectorXd> rows;
  std::vector<double> rhs;
  std::vector<int> ineq_ids;  // -1 for the permanent equality

  bool wouldBeDependent(const VectorXd& row) const {
    MatrixXd A(rows.size(), row.size());
    for (size_t i = 0; i < rows.size(); ++i) A.row(static_cast<int>(i)) = rows[i];
    const VectorXd res =
        row - A.transpose() * A.transpose().colPivHouseholderQr().solve(row);
    return res.norm() < 1e-9;
  }
};

}  // namespace

VectorXd euclidean_project(const VectorXd& point,
                           const FeasiblePolytope& polytope,
                           const VectorXd& lower) {
  const int K = polytope.numArms();
  VectorXd lb = lower.size() == K ? lower : VectorXd::Zero(K);
  const MatrixXd eb = polytope.extraB();
  const VectorXd ec = polytope.extraC();
  const int ne = static_cast<int>(eb.rows());

  // Inequalities: x_a >= lb_a as -x_a <= -lb_a, then the user rows.
  const int ni = K + ne;
  MatrixXd Ai(ni, K);
  VectorXd bi(ni);
  for (int a = 0; a < K; ++a) {
    Ai.row(a) = -VectorXd::Unit(K, a).transpose();
    bi[a] = -lb[a];
  }
  if (ne > 0) {
    Ai.bottomRows(ne) = eb;
    bi.tail(ne) = ec;
  }

  // Feasible start: simplex projection if it satisfies the user rows,
  // otherwise a phase-1 vertex of the shifted polytope.
  VectorXd x = project_to_simplex(point, lb);
  if (ne > 0 && ((Ai.bottomRows(ne) * x - bi.tail(ne)).array() > 1e-10).any()) {
    const int nv = K + ne;
    MatrixXd A = MatrixXd::Zero(1 + ne, nv);
    VectorXd b = VectorXd::Zero(1 + ne);
    A.row(0).head(K).setOnes();
    b[0] = 1.0 - lb.sum();
    A.bottomRows(ne).leftCols(K) = eb;
    A.bottomRightCorner(ne, ne).setIdentity();
    b.tail(ne) = ec - eb * lb;
    auto lp = detail::solveStandardFormLp(A, b, VectorXd::Zero(nv));
    if (!lp.feasible) {
      throw std::runtime_error("euclidean_project: empty target set");
    }
    x = lp.x.head(K) + lb;
  }

  WorkingSet ws;
  ws.rows.push_back(VectorXd::Ones(K));
  ws.rhs.push_back(1.0);
  ws.ineq_ids.push_back(-1);

  VectorXd multipliers;
  for (int iter = 0; iter < 400; ++iter) {
    const int m = static_cast<int>(ws.rows.size());
    MatrixXd A(m, K);
    VectorXd b(m);
    for (int i = 0; i < m; ++i) {
      A.row(i) = ws.rows[i];
      b[i] = ws.rhs[i];
    }
    // min ||x - p||^2 s.t. A x = b  =>  x* = p - A^T nu
    const MatrixXd gram = A * A.transpose();
    multipliers = gram.ldlt().solve(A * point - b);
    const VectorXd target = point - A.transpose() * multipliers;
    const VectorXd d = target - x;

    if (d.lpNorm<Eigen::Infinity>() <= 1e-11) {
      int worst = -1;
      double worst_nu = -1e-11;
      for (int i = 0; i < m; ++i) {
        if (ws.ineq_ids[i] >= 0 && multipliers[i] < worst_nu) {
          worst = i;
          worst_nu = multipliers[i];
        }
      }
      if (worst < 0) return x;  // KKT holds
      ws.rows.erase(ws.rows.begin() + worst);
      ws.rhs.erase(ws.rhs.begin() + worst);
      ws.ineq_ids.erase(ws.ineq_ids.begin() + worst);
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < ni; ++i) {
      bool inWs = false;
      for (int id : ws.ineq_ids) {
        if (id == i) {
          inWs = true;
          break;
        }
      }
      if (inWs) continue;
      const double gain = Ai.row(i).dot(d);
      if (gain <= 1e-12) continue;
      const double t = (bi[i] - Ai.row(i).dot(x)) / gain;
      if (t < alpha - 1e-12) {
        alpha = std::max(0.0, t);
        blocking = i;
      }
    }
    x += alpha * d;
    if (blocking >= 0) {
      const VectorXd row = Ai.row(blocking).transpose();
      if (ws.wouldBeDependent(row)) {
        // Degenerate corner: swap out the working inequality with the most
        // negative multiplier so the blocking row can enter.
        int worst = -1;
        double worst_nu = 0.0;
        for (size_t i = 0; i < ws.rows.size(); ++i) {
          if (ws.ineq_ids[i] >= 0 && multipliers[static_cast<int>(i)] < worst_nu) {
            worst = static_cast<int>(i);
            worst_nu = multipliers[static_cast<int>(i)];
          }
        }
        if (worst < 0) {
          throw std::runtime_error("euclidean_project: stalled on dependent constraints");
        }
        ws.rows.erase(ws.rows.begin() + worst);
        ws.rhs.erase(ws.rhs.begin() + worst);
        ws.ineq_ids.erase(ws.ineq_ids.begin() + worst);
      }
      ws.rows.push_back(row);
      ws.rhs.push_back(bi[blocking]);
      ws.ineq_ids.push_back(blocking);
    }
  }
  throw std::runtime_error("euclidean_project: active-set iteration did not converge");
}

std::vector<VertexPolicy> enumerate_all_vertices(const FeasiblePolytope& polytope) {
  const int K = polytope.numArms();
  const int N = polytope.numRows();
  std::vector<int> all(N);
  for (int i = 0; i < N; ++i) all[i] = i;
  std::vector<std::vector<int>> bases;
  independentBases(polytope.B(), all, K, bases);

  std::vector<VertexPolicy> out;
  for (const auto& basis : bases) {
    MatrixXd bhat(K, K);
    VectorXd chat(K);
    for (int i = 0; i < K; ++i) {
      bhat.row(i) = polytope.B().row(basis[i]);
      chat[i] = polytope.c()[basis[i]];
    }
    const VectorXd pi = bhat.partialPivLu().solve(chat);
    if (!pi.allFinite() || !polytope.isFeasible(pi, 1e-8)) continue;
    bool dup = false;
    for (const auto& v : out) {
      if ((v.pi - pi).lpNorm<Eigen::Infinity>() <= 1e-8) {
        dup = true;
        break;
      }
    }
    if (dup) continue;
    VertexPolicy v;
    v.pi = pi;
    v.basis = basis;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace conbandit
