#include "lorasp/diagnostics.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <json.hpp>

#include "lorasp/error.hpp"
#include "lorasp/problems.hpp"

namespace lorasp {

namespace {

void check_small(Index n) {
  if (n > kDenseLimit)
    throw Unsupported("dense diagnostics are limited to n <= " + std::to_string(kDenseLimit) + " (n = " +
                      std::to_string(n) + ")");
}

} // namespace

Matrix materialize_solve_operator(const HFactorization& h) {
  check_small(h.n());
  Matrix hinv = h.solve(Matrix(Matrix::Identity(h.n(), h.n())));
  return hinv;
}

Matrix recover_a_h(const Matrix& hinv) {
  Eigen::FullPivLU<Matrix> lu(hinv);
  if (!lu.isInvertible()) throw Error("solve operator is singular");
  return lu.inverse();
}

FactorizationError factorization_error(const Matrix& a_h, const Matrix& a) {
  FactorizationError e;
  e.abs_fro = (a - a_h).norm();
  const double na = a.norm();
  e.rel_fro = na > 0.0 ? e.abs_fro / na : e.abs_fro;
  return e;
}

FactorizationError factorization_error(const HFactorization& h, const SparseSymMatrix& a) {
  return factorization_error(recover_a_h(materialize_solve_operator(h)), a.to_dense());
}

ConditionReport preconditioned_condition_number(const Matrix& hinv, const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw NotSpd("condition number needs an SPD A");
  const Matrix l = llt.matrixL();
  Matrix c = l.transpose() * hinv * l;
  c = 0.5 * (c + c.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
  ConditionReport r;
  r.lambda_min = es.eigenvalues().minCoeff();
  r.lambda_max = es.eigenvalues().maxCoeff();
  r.indefinite = r.lambda_min <= 0.0;
  r.kappa = r.indefinite ? std::numeric_limits<double>::infinity() : r.lambda_max / r.lambda_min;
  return r;
}

ConditionReport preconditioned_condition_number(const HFactorization& h, const SparseSymMatrix& a) {
  return preconditioned_condition_number(materialize_solve_operator(h), a.to_dense());
}

double preservation_residual(const HFactorization& h, const SparseSymMatrix& a, const Vector& phi) {
  if (phi.size() != a.n()) throw DimensionMismatch("preserved vector has the wrong length");
  const Vector x = h.solve(Vector(a * phi));
  return (x - phi).norm() / phi.norm();
}

Matrix ExtendedSystem::full() const {
  const Index n = a_minus.rows();
  const Index m = c.rows();
  Matrix k(n + m, n + m);
  k.topLeftCorner(n, n) = a_minus;
  k.topRightCorner(n, m) = b.transpose();
  k.bottomLeftCorner(m, n) = b;
  k.bottomRightCorner(m, m) = c;
  return k;
}

ExtendedSystem extend_once(const Matrix& a, const std::vector<Index>& s, const std::vector<Index>& w,
                           const Matrix& u, const Matrix& rt) {
  const Index r = u.cols();
  if (u.rows() != static_cast<Index>(s.size()) || rt.rows() != r || rt.cols() != static_cast<Index>(w.size()))
    throw DimensionMismatch("extension factors do not match the index sets");
  ExtendedSystem ext;
  ext.a_minus = a;
  for (Index i : s)
    for (Index j : w) {
      ext.a_minus(i, j) = 0.0;
      ext.a_minus(j, i) = 0.0;
    }
  // Unknown order: black (r), then parent red (r).
  ext.b = Matrix::Zero(2 * r, a.rows());
  for (std::size_t k = 0; k < s.size(); ++k) ext.b.block(0, s[k], r, 1) = u.row(static_cast<Index>(k)).transpose();
  for (std::size_t k = 0; k < w.size(); ++k) ext.b.block(r, w[k], r, 1) = rt.col(static_cast<Index>(k));
  ext.c = Matrix::Zero(2 * r, 2 * r);
  ext.c.topRightCorner(r, r) = -Matrix::Identity(r, r);
  ext.c.bottomLeftCorner(r, r) = -Matrix::Identity(r, r);
  return ext;
}

ExtensionCheck verify_equivalent_extension(const Matrix& a, const ExtendedSystem& ext, double tol) {
  ExtensionCheck c;
  Matrix reduced = ext.a_minus;
  if (ext.c.rows() > 0) reduced -= ext.b.transpose() * Eigen::FullPivLU<Matrix>(ext.c).solve(ext.b);
  c.defect = (reduced - a).norm();
  const double na = a.norm();
  c.rel_defect = na > 0.0 ? c.defect / na : c.defect;
  c.holds = c.rel_defect <= tol;
  return c;
}

namespace {

double bound_ratio(double x) {
  return x < 1.0 ? (1.0 + x) / (1.0 - x) : std::numeric_limits<double>::infinity();
}

} // namespace

ConvergenceReport convergence_report(const Matrix& a, const Matrix& a_h, const Matrix& phi) {
  check_small(a.rows());
  ConvergenceReport r;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  r.lambda_min = es.eigenvalues().minCoeff();
  r.lambda_max = es.eigenvalues().maxCoeff();
  r.kappa_a = r.lambda_max / r.lambda_min;

  const Matrix diff = a - a_h;
  // kappa(A_H^{-1} A) from the pencil (A_H, A).
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(Matrix(0.5 * (a_h + a_h.transpose())), a,
                                                       Eigen::EigenvaluesOnly);
  const double gmin = ges.eigenvalues().minCoeff();
  const double gmax = ges.eigenvalues().maxCoeff();
  r.kappa_measured = gmin > 0.0 ? gmax / gmin : std::numeric_limits<double>::infinity();

  r.eps_uniform = two_norm(diff) / r.lambda_max;
  r.example1_bound = bound_ratio(r.eps_uniform * r.kappa_a);
  r.example1_holds = r.kappa_measured <= r.example1_bound * (1.0 + 1e-10);

  // S1 = span(phi); S2 = {v : phi^T A v = 0}.
  const Index n = a.rows();
  Eigen::HouseholderQR<Matrix> q1(phi);
  const Matrix full1 = q1.householderQ();
  const Matrix basis1 = full1.leftCols(phi.cols());
  Eigen::HouseholderQR<Matrix> q2(Matrix(a * phi));
  const Matrix full2 = q2.householderQ();
  const Matrix basis2 = full2.rightCols(n - phi.cols());
  r.eps_s1 = two_norm(diff * basis1) / r.lambda_max;
  r.eps_s2 = two_norm(diff * basis2) / r.lambda_max;
  Eigen::SelfAdjointEigenSolver<Matrix> es2(Matrix(basis2.transpose() * a * basis2), Eigen::EigenvaluesOnly);
  r.mu2 = es2.eigenvalues().minCoeff();
  r.example2_bound =
      bound_ratio(2.0 / std::sqrt(3.0) * r.eps_s1 * r.kappa_a + r.eps_s2 * r.lambda_max / r.mu2);
  r.example2_holds = r.kappa_measured <= r.example2_bound * (1.0 + 1e-10);
  return r;
}

std::string ConvergenceReport::to_json() const {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json j{{"lambda_min", lambda_min},
                   {"lambda_max", lambda_max},
                   {"kappa_a", kappa_a},
                   {"kappa_measured", num(kappa_measured)},
                   {"uniform", {{"eps", eps_uniform}, {"bound", num(example1_bound)}, {"holds", example1_holds}}},
                   {"two_subspace",
                    {{"eps_s1", eps_s1},
                     {"eps_s2", eps_s2},
                     {"mu2", mu2},
                     {"bound", num(example2_bound)},
                     {"holds", example2_holds}}}};
  return j.dump(1);
}

} // namespace lorasp
