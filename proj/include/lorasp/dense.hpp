#pragma once

#include <optional>
#include <string>

#include <Eigen/Cholesky>

#include "lorasp/types.hpp"

namespace lorasp {

enum class Tolerance {
  relative_2norm,    // drop sigma_i <= eps * sigma_1
  absolute_frobenius // smallest rank with Frobenius tail <= eps
};

/// M ~= U * Rt with orthonormal U.
struct LowRankFactor {
  Matrix U;
  Matrix Rt;
  double err = 0.0;     // 2-norm of M - U Rt
  double err_fro = 0.0; // Frobenius norm of M - U Rt
  double norm = 0.0;    // ||M||_2

  Index rank() const { return U.cols(); }
};

/// Largest singular value; 0 for empty matrices.
double two_norm(const Matrix& m);

/// Truncated SVD with Rt = Sigma V^T. eps = 0 keeps every nonzero singular value.
LowRankFactor truncated_svd(const Matrix& m, double eps, Tolerance mode = Tolerance::relative_2norm);

/// Truncation against a caller-supplied absolute 2-norm threshold: keeps
/// sigma_i > threshold.
LowRankFactor truncated_svd_abs(const Matrix& m, double threshold);

/// Modified Gram-Schmidt with one reorthogonalization pass. Columns are first
/// made orthogonal to `against` (assumed orthonormal); a column is dropped
/// when its remaining norm is below drop_tol times its original norm.
Matrix orthonormalize(const Matrix& cols, const Matrix* against = nullptr, double drop_tol = 1e-12);

/// Compression that keeps phi_x and the image A_sw phi_y in span(U):
/// U1 spans [phi_x, phi_y_image], the remainder (I - U1 U1^T) A_sw is
/// truncated at eps (relative to ||A_sw||_2, or absolute Frobenius), and
/// U = [U1, U2], Rt = U^T A_sw.
LowRankFactor preserving_compress(const Matrix& a_sw, const Matrix& phi_x, const Matrix& phi_y_image, double eps,
                                  Tolerance mode = Tolerance::relative_2norm);

/// Cholesky factor that accepts 0 x 0 operands.
class SpdFactor {
public:
  SpdFactor() = default;
  /// Throws NotSpd carrying `context` when a pivot is not positive.
  explicit SpdFactor(const Matrix& m, const std::string& context = {});

  Index dim() const { return dim_; }
  Matrix solve(const Matrix& rhs) const;
  Vector solve(const Vector& rhs) const;
  template <class Derived> void solve_in_place(Eigen::MatrixBase<Derived>& rhs) const {
    if (dim_ > 0) llt_.solveInPlace(rhs);
  }
  Matrix inverse() const;
  Index entries() const { return dim_ * dim_; }

private:
  Index dim_ = 0;
  Eigen::LLT<Matrix> llt_;
};

SpdFactor spd_factor(const Matrix& m, const std::string& context = {});
Matrix spd_solve(const SpdFactor& f, const Matrix& rhs);

enum class ProjectionScheme { one_sided, first_order_symmetric, second_order_symmetric };

const char* scheme_name(ProjectionScheme s);

/// Approximation Bt_approx = U Rt of B^T, where B is the (w x s) block A_ws.
struct ProjectionResult {
  Matrix U;  // orthonormal basis of the column space of the approximation
  Matrix Rt; // U^T Bt_approx
  Matrix U1s;
  Matrix U1w; // empty for the one-sided scheme
  Matrix U2;
  double err = 0.0;        // ||B^T - Bt_approx||_2
  double s_residual = 0.0; // ||(B - B~) X_s||_2
  double w_residual = 0.0; // ||(B^T - B~^T) X_w||_2

  Matrix Bt_approx() const { return U * Rt; }
  Index rank() const { return U.cols(); }
};

ProjectionResult project_one_sided(const Matrix& b, const Matrix& x_s, const Matrix& x_w, double eps1, double eps2);
ProjectionResult project_symmetric_first(const Matrix& b, const Matrix& x_s, const Matrix& x_w, double eps1,
                                         double eps2);
ProjectionResult project_symmetric_second(const Matrix& b, const Matrix& x_s, const Matrix& x_w, double eps1,
                                          double eps2);
ProjectionResult project(ProjectionScheme scheme, const Matrix& b, const Matrix& x_s, const Matrix& x_w,
                         double eps1, double eps2);

} // namespace lorasp
