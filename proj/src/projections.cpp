#include "lorasp/dense.hpp"

#include "lorasp/error.hpp"

namespace lorasp {

namespace {

Matrix hcat(const Matrix& a, const Matrix& b) {
  Matrix out(std::max(a.rows(), b.rows()), a.cols() + b.cols());
  if (a.cols() > 0) out.leftCols(a.cols()) = a;
  if (b.cols() > 0) out.rightCols(b.cols()) = b;
  return out;
}

// Columns of X may be absent altogether; keep the row count consistent.
Matrix or_empty(const Matrix& x, Index rows) { return x.size() == 0 ? Matrix(rows, 0) : x; }

void check(const Matrix& b, const Matrix& x_s, const Matrix& x_w, double eps1, double eps2) {
  if (x_s.size() > 0 && x_s.rows() != b.cols()) throw DimensionMismatch("X_s rows differ from B columns");
  if (x_w.size() > 0 && x_w.rows() != b.rows()) throw DimensionMismatch("X_w rows differ from B rows");
  if (eps1 < 0.0 || eps2 < 0.0) throw InvalidArgument("negative projection tolerance");
  if (eps1 > eps2) throw InvalidArgument("projection needs eps1 <= eps2");
}

ProjectionResult finish(ProjectionResult r, const Matrix& bt, const Matrix& bt_approx, const Matrix& x_s,
                        const Matrix& x_w) {
  r.Rt = r.U.transpose() * bt_approx;
  const Matrix diff = bt - r.U * r.Rt;
  r.err = two_norm(diff);
  r.s_residual = x_s.size() > 0 ? two_norm(diff.transpose() * x_s) : 0.0;
  r.w_residual = x_w.size() > 0 ? two_norm(diff * x_w) : 0.0;
  return r;
}

} // namespace

const char* scheme_name(ProjectionScheme s) {
  switch (s) {
  case ProjectionScheme::one_sided: return "one-sided";
  case ProjectionScheme::first_order_symmetric: return "first-order-symmetric";
  case ProjectionScheme::second_order_symmetric: return "second-order-symmetric";
  }
  return "?";
}

ProjectionResult project_one_sided(const Matrix& b, const Matrix& x_s_in, const Matrix& x_w_in, double eps1,
                                   double eps2) {
  check(b, x_s_in, x_w_in, eps1, eps2);
  const Matrix bt = b.transpose();
  const Matrix x_s = or_empty(x_s_in, bt.rows());
  const Matrix x_w = or_empty(x_w_in, bt.cols());
  const double nb = two_norm(bt);

  ProjectionResult r;
  r.U1s = truncated_svd(hcat(x_s, bt * x_w), eps1).U;
  const Matrix rest = bt - r.U1s * (r.U1s.transpose() * bt);
  r.U2 = truncated_svd_abs(rest, eps2 * nb).U;
  r.U = hcat(r.U1s, orthonormalize(r.U2, &r.U1s));
  // Bt~ = U1 U1^T B^T + U2 U2^T (I - U1 U1^T) B^T = U U^T B^T.
  return finish(std::move(r), bt, bt, x_s, x_w);
}

ProjectionResult project_symmetric_first(const Matrix& b, const Matrix& x_s_in, const Matrix& x_w_in, double eps1,
                                         double eps2) {
  check(b, x_s_in, x_w_in, eps1, eps2);
  const Matrix bt = b.transpose();
  const Matrix x_s = or_empty(x_s_in, bt.rows());
  const Matrix x_w = or_empty(x_w_in, bt.cols());
  const double nb = two_norm(bt);

  ProjectionResult r;
  r.U1s = truncated_svd(hcat(x_s, bt * x_w), eps1).U;
  r.U1w = truncated_svd(hcat(x_w, b * x_s), eps1).U;
  const Matrix bhat = r.U1s * (r.U1s.transpose() * bt * r.U1w) * r.U1w.transpose();
  const Matrix d = bt - bhat;
  r.U2 = truncated_svd_abs(d, eps2 * nb).U;
  const Matrix approx = bhat + r.U2 * (r.U2.transpose() * d);
  r.U = orthonormalize(hcat(r.U1s, r.U2));
  return finish(std::move(r), bt, approx, x_s, x_w);
}

ProjectionResult project_symmetric_second(const Matrix& b, const Matrix& x_s_in, const Matrix& x_w_in, double eps1,
                                          double eps2) {
  check(b, x_s_in, x_w_in, eps1, eps2);
  const Matrix bt = b.transpose();
  const Matrix x_s = or_empty(x_s_in, bt.rows());
  const Matrix x_w = or_empty(x_w_in, bt.cols());
  const double nb = two_norm(bt);

  ProjectionResult r;
  r.U1s = truncated_svd(x_s, eps1).U;
  r.U1w = truncated_svd(x_w, eps1).U;
  // D = (I - Ps) B^T (I - Pw); Bhat = B^T - D.
  Matrix d = bt - r.U1s * (r.U1s.transpose() * bt);
  d -= (d * r.U1w) * r.U1w.transpose();
  r.U2 = truncated_svd_abs(d, eps2 * nb).U;
  const Matrix approx = bt - d + r.U2 * (r.U2.transpose() * d);
  // Column space: U1s, the part of B^T U1w outside U1s, and U2.
  r.U = orthonormalize(hcat(hcat(r.U1s, bt * r.U1w), r.U2));
  return finish(std::move(r), bt, approx, x_s, x_w);
}

ProjectionResult project(ProjectionScheme scheme, const Matrix& b, const Matrix& x_s, const Matrix& x_w,
                         double eps1, double eps2) {
  switch (scheme) {
  case ProjectionScheme::one_sided: return project_one_sided(b, x_s, x_w, eps1, eps2);
  case ProjectionScheme::first_order_symmetric: return project_symmetric_first(b, x_s, x_w, eps1, eps2);
  case ProjectionScheme::second_order_symmetric: return project_symmetric_second(b, x_s, x_w, eps1, eps2);
  }
  throw InvalidArgument("unknown projection scheme");
}

} // namespace lorasp
