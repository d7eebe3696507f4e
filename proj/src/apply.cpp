#include <vector>

#include "lorasp/error.hpp"
#include "lorasp/factorization.hpp"

namespace lorasp {

// Level-batched solve: all forward steps of a level, then the parent level,
// then the backward steps of the level in reverse elimination order.
Matrix HFactorization::solve(const Matrix& b) const {
  if (b.rows() != n()) throw DimensionMismatch("solve: right-hand side has the wrong length");
  const Index m = b.cols();
  Matrix r(n(), m);
  for (Index i = 0; i < n(); ++i) r.row(i) = b.row(perm_[i]);

  std::vector<Matrix> saved;
  saved.reserve(levels_.size());
  for (const LevelFactor& lf : levels_) {
    Matrix p = Matrix::Zero(lf.parent_size, m);
    for (const NodeFactor& nf : lf.nodes) {
      const Matrix y = nf.ass.solve(Matrix(r.middleRows(nf.offset, nf.dim)));
      const Matrix g = nf.schur.solve(Matrix(nf.U.transpose() * y));
      const Matrix t = y - nf.W * g; // M_ss r_s
      for (const Coupling& c : nf.couplings) {
        auto target = c.to_parent ? p.middleRows(c.offset, c.block.cols()) : r.middleRows(c.offset, c.block.cols());
        target.noalias() -= c.block.transpose() * t;
      }
      p.middleRows(nf.parent_offset, nf.rank) += g; // P_ss r_s
    }
    saved.push_back(std::move(r));
    r = std::move(p);
  }

  Matrix x = root_.solve(r);

  for (std::size_t k = levels_.size(); k-- > 0;) {
    const LevelFactor& lf = levels_[k];
    const Matrix& rs = saved[k];
    Matrix xs(lf.super_size, m);
    for (auto it = lf.nodes.rbegin(); it != lf.nodes.rend(); ++it) {
      const NodeFactor& nf = *it;
      Matrix v = rs.middleRows(nf.offset, nf.dim);
      for (const Coupling& c : nf.couplings) {
        const Matrix& src = c.to_parent ? x : xs;
        v.noalias() -= c.block * src.middleRows(c.offset, c.block.cols());
      }
      const Matrix y = nf.ass.solve(v);
      // x_s = M_ss v + P_ss^T psi_r
      const Matrix corr = nf.schur.solve(Matrix(x.middleRows(nf.parent_offset, nf.rank) - nf.U.transpose() * y));
      xs.middleRows(nf.offset, nf.dim) = y + nf.W * corr;
    }
    x = std::move(xs);
  }

  Matrix out(n(), m);
  for (Index i = 0; i < n(); ++i) out.row(perm_[i]) = x.row(i);
  return out;
}

Vector HFactorization::solve(const Vector& b) const {
  if (b.size() != n()) throw DimensionMismatch("solve: right-hand side has the wrong length");
  return solve(Matrix(b)).col(0);
}

std::function<Vector(const Vector&)> as_linear_operator(const HFactorization& h) {
  return [&h](const Vector& b) { return h.solve(b); };
}

} // namespace lorasp
