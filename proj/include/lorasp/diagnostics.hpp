#pragma once

#include <string>
#include <vector>

#include "lorasp/factorization.hpp"
#include "lorasp/sparse.hpp"

namespace lorasp {

/// Columns H^{-1} e_j for n <= 4096.
Matrix materialize_solve_operator(const HFactorization& h);
/// A_H as the inverse of the materialized solve operator.
Matrix recover_a_h(const Matrix& hinv);

struct FactorizationError {
  double abs_fro = 0.0; // ||A - A_H||_F
  double rel_fro = 0.0; // ||A - A_H||_F / ||A||_F
};

FactorizationError factorization_error(const HFactorization& h, const SparseSymMatrix& a);
FactorizationError factorization_error(const Matrix& a_h, const Matrix& a);

struct ConditionReport {
  double kappa = 0.0;      // lambda_max / lambda_min of A_H^{-1} A
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool indefinite = false; // A_H^{-1} has a nonpositive eigenvalue on the A-inner product
};

/// Eigenvalues of the symmetrized pencil L^T H^{-1} L with A = L L^T.
ConditionReport preconditioned_condition_number(const HFactorization& h, const SparseSymMatrix& a);
ConditionReport preconditioned_condition_number(const Matrix& hinv, const Matrix& a);

/// ||H^{-1}(A phi) - phi|| / ||phi||
double preservation_residual(const HFactorization& h, const SparseSymMatrix& a, const Vector& phi);

/// Extended system [[A_-, B^T], [B, C]] of a single compression step.
struct ExtendedSystem {
  Matrix a_minus;
  Matrix b;
  Matrix c;

  Matrix full() const;
};

/// Dense extension of one step: A_sw and A_ws are removed from A_-, and the
/// black and parent red unknowns couple through U^T (to s), R^T (to w), and
/// -I between each other.
ExtendedSystem extend_once(const Matrix& a, const std::vector<Index>& s, const std::vector<Index>& w,
                           const Matrix& u, const Matrix& rt);

struct ExtensionCheck {
  double defect = 0.0;     // ||A_- - B^T C^{-1} B - A||_F
  double rel_defect = 0.0; // defect / ||A||_F
  bool holds = false;      // rel_defect <= tol
};

ExtensionCheck verify_equivalent_extension(const Matrix& a, const ExtendedSystem& ext, double tol = 1e-10);

/// Measured quantities of the convergence theorem for two splittings:
/// the uniform one (S1 = R^n) and S1 = span(phi), S2 its A-orthogonal complement.
struct ConvergenceReport {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa_a = 0.0;
  double kappa_measured = 0.0;
  // Uniform accuracy: eps = ||A - A_H||_2 / lambda_max.
  double eps_uniform = 0.0;
  double example1_bound = 0.0; // infinity when the coercivity condition fails
  // Two-subspace splitting.
  double eps_s1 = 0.0;
  double eps_s2 = 0.0;
  double mu2 = 0.0;
  double example2_bound = 0.0;
  bool example1_holds = false;
  bool example2_holds = false;

  std::string to_json() const;
};

ConvergenceReport convergence_report(const Matrix& a, const Matrix& a_h, const Matrix& phi);

/// Independent dense replay of a two-level factorization on the extended
/// system K = diag(A, C): every super node of the leaf level is compressed,
/// extended and eliminated with explicit U_i, L_i factors, and the parent
/// level is kept exact. Used to measure the error decomposition
/// K = E + K_H with K_H = T K_{N+1} T^T.
struct ExtendedTrace {
  Index n = 0;
  Index extended_dim = 0;
  Matrix k1;     // diag(A, C) in the permuted ordering
  Matrix kh;     // T K_{N+1} T^T
  Matrix e;      // k1 - kh
  Matrix a_h;    // Schur complement of kh onto the original unknowns, original ordering
  std::vector<double> step_errors_fro; // ||E_sw||_F of each step
  double step_sum_fro = 0.0;           // sum of ||E_i||_F = sqrt(2) ||E_sw||_F over the steps
  double e_fro = 0.0;
  double e_cc_fro = 0.0;    // should vanish: errors never touch black/red pairs
  double kcc_inv_kcf_fro = 0.0;
  double kcc_inv_fro = 0.0;
  double theorem1_bound = 0.0; // sqrt(1 + 2 ||K_cc^{-1} K_cf||^2) ||E|| + ||K_cc^{-1}|| ||E||^2
  // Same form with ||E||_F replaced by the per-step sum.
  double accumulated_bound = 0.0;
  double measured_fro = 0.0;   // ||A - A_H||_F
};

ExtendedTrace extended_two_level_trace(const SparseSymMatrix& a, const ClusterHierarchy& hier,
                                       const SolverConfig& cfg, const Matrix& preserve = Matrix());

} // namespace lorasp
