#include <doctest.h>

#include <random>

#include <Eigen/SVD>

#include "helpers.hpp"
#include "lorasp/dense.hpp"
#include "lorasp/error.hpp"

using namespace lorasp;
using testing::gaussian;

namespace {

// Independent 2-norm through a full SVD.
double norm2(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::BDCSVD<Matrix>(m).singularValues()(0);
}

double orth_defect(const Matrix& u) {
  return (u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
}

} // namespace

TEST_SUITE("dense") {

TEST_CASE("truncated svd of a zero matrix has rank 0") {
  const LowRankFactor f = truncated_svd(Matrix::Zero(6, 9), 0.1);
  CHECK(f.rank() == 0);
  CHECK(f.err == 0.0);
}

TEST_CASE("truncated svd recovers an exact rank-1 matrix") {
  std::mt19937_64 rng(1);
  const Matrix m = gaussian(10, 1, rng) * gaussian(1, 14, rng);
  const LowRankFactor f = truncated_svd(m, 0.1);
  CHECK(f.rank() == 1);
  CHECK(norm2(m - f.U * f.Rt) <= 1e-12 * norm2(m));
}

TEST_CASE("truncated svd meets the relative 2-norm tolerance against a full svd") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix m = gaussian(20, 30, rng);
    const LowRankFactor f = truncated_svd(m, 0.3);
    const Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    Index expect = 0;
    while (expect < sv.size() && sv(expect) > 0.3 * sv(0)) ++expect;
    CHECK(f.rank() == expect);
    CHECK(norm2(m - f.U * f.Rt) <= 0.3 * sv(0) * (1 + 1e-12));
    CHECK(orth_defect(f.U) <= 1e-12);
    CHECK(f.err == doctest::Approx(norm2(m - f.U * f.Rt)).epsilon(1e-8));
  }
}

TEST_CASE("absolute Frobenius truncation keeps the tail below eps") {
  std::mt19937_64 rng(8);
  const Matrix m = gaussian(12, 15, rng);
  const LowRankFactor f = truncated_svd(m, 2.0, Tolerance::absolute_frobenius);
  CHECK((m - f.U * f.Rt).norm() <= 2.0 * (1 + 1e-12));
  if (f.rank() > 0) {
    const Matrix shorter = f.U.leftCols(f.rank() - 1);
    CHECK((m - shorter * shorter.transpose() * m).norm() > 2.0);
  }
}

TEST_CASE("orthonormalize drops dependent columns") {
  std::mt19937_64 rng(9);
  Matrix c = gaussian(8, 3, rng);
  Matrix d(8, 4);
  d << c, c.col(0) + 2.0 * c.col(2);
  const Matrix q = orthonormalize(d);
  CHECK(q.cols() == 3);
  CHECK(orth_defect(q) <= 1e-14);
  const Matrix q2 = orthonormalize(gaussian(8, 2, rng), &q);
  CHECK((q.transpose() * q2).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("preserving compression keeps phi_x and the image of phi_y") {
  std::mt19937_64 rng(4);
  SUBCASE("e1 with eps=1") {
    const Matrix a = gaussian(6, 9, rng);
    Matrix e1 = Matrix::Zero(6, 1);
    e1(0) = 1.0;
    const LowRankFactor f = preserving_compress(a, e1, Matrix(6, 0), 1.0);
    CHECK((f.U * (f.U.transpose() * e1) - e1).norm() <= 1e-14);
  }
  SUBCASE("empty preserved set is plain truncated svd") {
    const Matrix a = gaussian(10, 12, rng);
    const LowRankFactor f = preserving_compress(a, Matrix(10, 0), Matrix(10, 0), 0.2);
    const LowRankFactor g = truncated_svd(a, 0.2);
    CHECK(f.rank() == g.rank());
    CHECK(norm2(f.U * f.Rt - g.U * g.Rt) <= 1e-12 * norm2(a));
  }
  SUBCASE("random 16x24 instance") {
    const Matrix b = gaussian(16, 24, rng); // A_sw
    const Matrix phi_x = gaussian(16, 1, rng);
    const Matrix phi_y = gaussian(24, 1, rng);
    const LowRankFactor f = preserving_compress(b, phi_x, b * phi_y, 0.2);
    const Matrix approx = f.U * f.Rt;
    CHECK(orth_defect(f.U) <= 1e-12);
    CHECK(((b - approx) * phi_y).norm() <= 1e-10 * norm2(b) * phi_y.norm());
    CHECK(((b - approx).transpose() * phi_x).norm() <= 1e-10 * norm2(b) * phi_x.norm());
    CHECK(norm2(b - approx) <= 0.2 * norm2(b) * (1 + 1e-12));
  }
}

TEST_CASE("spd factor solves") {
  const SpdFactor id(Matrix::Identity(3, 3));
  const Vector r = Vector::LinSpaced(3, 1.0, 3.0);
  CHECK(id.solve(r) == r);
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  const Vector x = SpdFactor(m).solve(Vector(Vector::Unit(2, 0)));
  CHECK(x(0) == doctest::Approx(2.0 / 3.0));
  CHECK(x(1) == doctest::Approx(-1.0 / 3.0));
  std::mt19937_64 rng(3);
  const Matrix a = testing::random_spd(8, rng);
  const Vector b = gaussian(8, 1, rng);
  CHECK((a * spd_solve(spd_factor(a), b) - b).norm() <= 1e-10 * b.norm());
  CHECK(SpdFactor(Matrix(0, 0)).solve(Matrix(0, 2)).size() == 0);
  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  CHECK_THROWS_AS(SpdFactor(bad, "ctx"), NotSpd);
}

}
