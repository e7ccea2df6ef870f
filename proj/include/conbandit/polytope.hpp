#pragma once

#include <vector>

#include "conbandit/model.hpp"

namespace conbandit {

// Neighbors of an extreme point: vertices sharing K-1 active independent
// rows with the origin. leaving_row is the origin basis row relaxed to reach
// the neighbor.
struct NeighborSet {
  VertexPolicy origin;
  struct Entry {
    VertexPolicy vertex;
    int leaving_row;
  };
  std::vector<Entry> neighbors;
};

// Vertex maximizing means^T pi over F, with its active basis. Deterministic
// under ties (Bland's rule). Throws on an infeasible polytope.
VertexPolicy solve_optimal_policy(const VectorXd& means,
                                  const FeasiblePolytope& polytope);

// All neighbors of `vertex`. Degenerate vertices (more than K active rows)
// are handled by enumerating every maximal independent active basis and
// taking the union of the pivots. Throws on a singular basis.
NeighborSet enumerate_neighbors(const VertexPolicy& vertex,
                                const FeasiblePolytope& polytope);

// Euclidean projection onto F intersected with {x : x_a >= lower_a}. Pass an
// empty vector for the plain polytope. Solved by primal active-set iteration
// on the KKT system to residual <= 1e-8. Throws if the target set is empty.
VectorXd euclidean_project(const VectorXd& point,
                           const FeasiblePolytope& polytope,
                           const VectorXd& lower = VectorXd());

// Projection onto the probability simplex with per-coordinate lower bounds.
VectorXd project_to_simplex(const VectorXd& point,
                            const VectorXd& lower = VectorXd());

// Test/diagnostic helper: every vertex of F found by brute-force basis
// enumeration. Exponential in the row count; fine for N <= ~16.
std::vector<VertexPolicy> enumerate_all_vertices(const FeasiblePolytope& polytope);

}  // namespace conbandit
