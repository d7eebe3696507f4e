#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lorasp/sparse.hpp"

namespace lorasp {

using Operator = std::function<Vector(const Vector&)>;

struct IterationReport {
  Index iterations = 0;
  std::vector<double> residual_history; // one entry per iteration
  bool converged = false;
  bool diverged = false;
  double final_residual = 0.0; // ||b - A x|| / ||b||
  double wall_time = 0.0;      // seconds
  std::string preconditioning; // "right" for GMRES, "left" for the stationary iteration
  Vector x;
};

/// Right-preconditioned full GMRES from x0 = 0 with modified Gram-Schmidt and
/// one reorthogonalization pass. Convergence is tested on the true relative
/// residual. A null precond means no preconditioning.
IterationReport gmres_solve(const SparseSymMatrix& a, const Vector& b, const Operator& precond, double tol = 1e-10,
                            Index max_iter = 300);

/// x_{k+1} = x_k + H^{-1}(b - A x_k) from x0 = 0. With x_star the stopping
/// test is ||x_k - x*|| / ||x*|| <= tol, otherwise the relative residual.
/// An error ratio above 1e6 stops the iteration and sets `diverged`.
IterationReport stationary_solve(const SparseSymMatrix& a, const Vector& b, const Operator& precond,
                                 double tol = 1e-6, const Vector* x_star = nullptr, Index max_iter = 1000);

/// b = A x* with x* uniform in [-1, 1]^n from a seeded generator.
Vector random_solution(Index n, std::uint64_t seed);

} // namespace lorasp
