#include "lorasp/dense.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lorasp/error.hpp"

namespace lorasp {

namespace {

struct Svd {
  Matrix U;
  Vector s;
};

// Left singular vectors only; Rt = U^T M equals Sigma V^T on the kept columns.
Svd thin_svd(const Matrix& m) {
  Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> svd(m, Eigen::ComputeThinU);
  return {svd.matrixU(), svd.singularValues()};
}

LowRankFactor from_svd(const Matrix& m, const Svd& d, Index rank) {
  LowRankFactor f;
  f.U = d.U.leftCols(rank);
  f.Rt = f.U.transpose() * m;
  const Index k = d.s.size();
  f.err = rank < k ? d.s(rank) : 0.0;
  f.err_fro = rank < k ? d.s.tail(k - rank).norm() : 0.0;
  f.norm = k > 0 ? d.s(0) : 0.0;
  return f;
}

LowRankFactor empty_factor(const Matrix& m) {
  LowRankFactor f;
  f.U = Matrix::Zero(m.rows(), 0);
  f.Rt = Matrix::Zero(0, m.cols());
  return f;
}

} // namespace

double two_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  // Eigenvalues of the smaller Gram matrix are enough for the largest singular value.
  const Matrix g = m.rows() <= m.cols() ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues()(g.rows() - 1)));
}

LowRankFactor truncated_svd(const Matrix& m, double eps, Tolerance mode) {
  if (eps < 0.0) throw InvalidArgument("negative compression tolerance");
  if (m.size() == 0) return empty_factor(m);
  const Svd d = thin_svd(m);
  const Index k = d.s.size();
  Index rank = 0;
  if (mode == Tolerance::relative_2norm) {
    const double cut = eps * d.s(0);
    while (rank < k && d.s(rank) > cut) ++rank;
  } else {
    // Smallest rank whose discarded tail has Frobenius norm <= eps.
    double tail2 = 0.0;
    rank = k;
    while (rank > 0 && tail2 + d.s(rank - 1) * d.s(rank - 1) <= eps * eps) {
      tail2 += d.s(rank - 1) * d.s(rank - 1);
      --rank;
    }
    while (rank > 0 && d.s(rank - 1) == 0.0) --rank;
  }
  return from_svd(m, d, rank);
}

LowRankFactor truncated_svd_abs(const Matrix& m, double threshold) {
  if (m.size() == 0) return empty_factor(m);
  const Svd d = thin_svd(m);
  Index rank = 0;
  while (rank < d.s.size() && d.s(rank) > threshold) ++rank;
  return from_svd(m, d, rank);
}

Matrix orthonormalize(const Matrix& cols, const Matrix* against, double drop_tol) {
  Matrix q(cols.rows(), cols.cols());
  Index kept = 0;
  for (Index j = 0; j < cols.cols(); ++j) {
    Vector v = cols.col(j);
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      if (against)
        for (Index i = 0; i < against->cols(); ++i) v -= against->col(i).dot(v) * against->col(i);
      for (Index i = 0; i < kept; ++i) v -= q.col(i).dot(v) * q.col(i);
    }
    const double nv = v.norm();
    if (nv < drop_tol * norm0) continue;
    q.col(kept++) = v / nv;
  }
  return q.leftCols(kept);
}

LowRankFactor preserving_compress(const Matrix& a_sw, const Matrix& phi_x, const Matrix& phi_y_image, double eps,
                                  Tolerance mode) {
  if (phi_x.size() > 0 && phi_x.rows() != a_sw.rows()) throw DimensionMismatch("phi_x rows differ from A_sw rows");
  if (phi_y_image.size() > 0 && phi_y_image.rows() != a_sw.rows())
    throw DimensionMismatch("A_sw phi_y rows differ from A_sw rows");
  Matrix spanning(a_sw.rows(), phi_x.cols() + phi_y_image.cols());
  if (phi_x.size() > 0) spanning.leftCols(phi_x.cols()) = phi_x;
  if (phi_y_image.size() > 0) spanning.rightCols(phi_y_image.cols()) = phi_y_image;
  const Matrix u1 = orthonormalize(spanning);
  if (a_sw.cols() == 0) {
    LowRankFactor f;
    f.U = u1;
    f.Rt = Matrix::Zero(u1.cols(), 0);
    return f;
  }

  const double norm = two_norm(a_sw);
  const Matrix p = a_sw - u1 * (u1.transpose() * a_sw);
  LowRankFactor rest;
  if (mode == Tolerance::relative_2norm) rest = truncated_svd_abs(p, eps * norm);
  else rest = truncated_svd(p, eps, Tolerance::absolute_frobenius);
  // Re-orthogonalize U2 against U1 to remove rounding drift.
  const Matrix u2 = orthonormalize(rest.U, &u1);

  LowRankFactor f;
  f.U.resize(a_sw.rows(), u1.cols() + u2.cols());
  f.U << u1, u2;
  f.Rt = f.U.transpose() * a_sw;
  f.err = rest.err;
  f.err_fro = rest.err_fro;
  f.norm = norm;
  return f;
}

SpdFactor::SpdFactor(const Matrix& m, const std::string& context) : dim_(m.rows()) {
  if (m.rows() != m.cols()) throw DimensionMismatch("SPD factor of a non-square matrix");
  if (dim_ == 0) return;
  llt_.compute(m);
  if (llt_.info() != Eigen::Success)
    throw NotSpd(context.empty() ? "matrix is not SPD" : "matrix is not SPD at " + context);
}

Matrix SpdFactor::solve(const Matrix& rhs) const {
  if (rhs.rows() != dim_) throw DimensionMismatch("SPD solve: rhs rows differ from factor dimension");
  if (dim_ == 0) return Matrix(0, rhs.cols());
  return llt_.solve(rhs);
}

Vector SpdFactor::solve(const Vector& rhs) const {
  if (rhs.size() != dim_) throw DimensionMismatch("SPD solve: rhs length differs from factor dimension");
  if (dim_ == 0) return Vector(0);
  return llt_.solve(rhs);
}

Matrix SpdFactor::inverse() const { return solve(Matrix(Matrix::Identity(dim_, dim_))); }

SpdFactor spd_factor(const Matrix& m, const std::string& context) { return SpdFactor(m, context); }

Matrix spd_solve(const SpdFactor& f, const Matrix& rhs) { return f.solve(rhs); }

} // namespace lorasp
