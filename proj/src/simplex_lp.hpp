#pragma once

// Dense two-phase tableau simplex for tiny standard-form LPs:
//   maximize obj^T x  s.t.  A x = b, x >= 0.
// Bland's rule throughout, so the solver cannot cycle and ties resolve
// deterministically.

#include <Eigen/Dense>
#include <vector>

namespace conbandit::detail {

struct LpSolution {
  bool feasible = false;
  bool bounded = true;
  Eigen::VectorXd x;
  double objective = 0.0;
};

inline LpSolution solveStandardFormLp(Eigen::MatrixXd A, Eigen::VectorXd b,
                                      const Eigen::VectorXd& obj) {
  constexpr double kTol = 1e-10;
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());

  for (int i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      A.row(i) = -A.row(i);
      b[i] = -b[i];
    }
  }

  // Tableau columns: n original, m artificial, 1 rhs.
  Eigen::MatrixXd T(m, n + m + 1);
  T.leftCols(n) = A;
  T.middleCols(n, m) = Eigen::MatrixXd::Identity(m, m);
  T.col(n + m) = b;
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  auto pivot = [&](int row, int col) {
    T.row(row) /= T(row, col);
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = T(i, col);
      if (f != 0.0) T.row(i) -= f * T.row(row);
    }
    basis[row] = col;
  };

  // Runs Bland-rule simplex for the cost vector `c` over columns [0, ncols).
  auto run = [&](const Eigen::VectorXd& c, int ncols) -> bool {
    for (int iter = 0; iter < 20000; ++iter) {
      int enter = -1;
      for (int j = 0; j < ncols; ++j) {
        double r = c[j];
        for (int i = 0; i < m; ++i) r -= c[basis[i]] * T(i, j);
        if (r > kTol) {
          enter = j;
          break;  // Bland: lowest index
        }
      }
      if (enter < 0) return true;  // optimal
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i) {
        if (T(i, enter) > kTol) {
          const double ratio = T(i, n + m) / T(i, enter);
          if (leave < 0 || ratio < best - kTol ||
              (ratio < best + kTol && basis[i] < basis[leave])) {
            leave = i;
            best = ratio;
          }
        }
      }
      if (leave < 0) return false;  // unbounded
      pivot(leave, enter);
    }
    return false;
  };

  LpSolution out;

  // Phase 1: drive artificials to zero.
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n + m);
  c1.tail(m).setConstant(-1.0);
  run(c1, n + m);
  double art = 0.0;
  for (int i = 0; i < m; ++i) {
    if (basis[i] >= n) art += T(i, n + m);
  }
  if (art > 1e-8) {
    out.feasible = false;
    return out;
  }
  // Pivot any artificial still in the basis (at zero) onto an original column.
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    int col = -1;
    for (int j = 0; j < n; ++j) {
      if (std::abs(T(i, j)) > 1e-8) {
        col = j;
        break;
      }
    }
    if (col >= 0) pivot(i, col);
    // else: redundant row; the artificial stays basic at zero and phase 2
    // never selects artificial columns, so it is harmless.
  }

  // Phase 2.
  Eigen::VectorXd c2 = Eigen::VectorXd::Zero(n + m);
  c2.head(n) = obj;
  const bool bounded = run(c2, n);

  out.feasible = true;
  out.bounded = bounded;
  out.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) out.x[basis[i]] = T(i, n + m);
  }
  out.objective = obj.dot(out.x);
  return out;
}

}  // namespace conbandit::detail
