#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "lorasp/diagnostics.hpp"
#include "lorasp/error.hpp"
#include "lorasp/problems.hpp"

namespace lorasp {

namespace {

Matrix gather(const Matrix& m, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i) out(i, j) = m(rows[i], cols[j]);
  return out;
}

std::vector<Index> range(Index b, Index e) {
  std::vector<Index> v(static_cast<std::size_t>(e - b));
  for (Index i = b; i < e; ++i) v[i - b] = i;
  return v;
}

} // namespace

// Dense replay on the extended system. All unknowns live in one index space:
// the n original unknowns in the permuted order, followed by (black, red)
// pairs appended as compressions happen. x is the current system K_i; t the
// accumulated product of the U_j L_j factors; k1 = diag(A, C).
ExtendedTrace extended_two_level_trace(const SparseSymMatrix& a, const ClusterHierarchy& hier,
                                       const SolverConfig& cfg, const Matrix& preserve) {
  cfg.validate();
  const Index n = a.n();
  if (n > 1024) throw Unsupported("the extended trace is limited to n <= 1024");
  if (hier.n() != n) throw DimensionMismatch("hierarchy and matrix sizes differ");
  const int lv = hier.depth();
  if (lv < 1) throw Unsupported("the extended trace needs at least one compressed level");

  Matrix phi;
  if (cfg.preserving()) {
    phi = preserve.size() > 0 ? preserve : Matrix(Matrix::Ones(n, 1));
    if (phi.rows() != n) throw DimensionMismatch("preserved vectors have the wrong length");
  } else {
    phi = Matrix(n, 0);
  }

  const Index cap = 3 * n;
  const auto perm = hier.perm();
  const Matrix ad = a.to_dense();
  Matrix x = Matrix::Zero(cap, cap);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) x(i, j) = ad(perm[i], perm[j]);
  Matrix k1 = x;
  Matrix t = Matrix::Identity(cap, cap);
  Matrix phi_ext = Matrix::Zero(cap, phi.cols());
  for (Index i = 0; i < n; ++i) phi_ext.row(i) = phi.row(perm[i]);

  const Index supers = hier.num_supers(lv);
  // owner[k]: super node at this level that k belongs to (original) or came from (red).
  std::vector<Index> owner(cap, -1);
  std::vector<char> alive(cap, 0);
  for (Index s = 0; s < supers; ++s)
    for (Index p = hier.red_begin(lv - 1, s); p < hier.red_end(lv - 1, s); ++p) {
      owner[p] = s;
      alive[p] = 1;
    }
  Index m = n;

  ExtendedTrace tr;
  tr.n = n;
  const double mesh = cfg.h > 0.0 ? cfg.h : 1.0 / (std::sqrt(static_cast<double>(n)) + 1.0);
  const double eps = eps_for_level(cfg, lv, lv, mesh);

  for (Index s = 0; s < supers; ++s) {
    const std::vector<Index> sidx = range(hier.red_begin(lv - 1, s), hier.red_end(lv - 1, s));
    std::vector<Index> widx;
    for (Index j = 0; j < m; ++j) {
      if (!alive[j] || owner[j] == s || hier.is_neighbor(lv, s, owner[j])) continue;
      bool coupled = false;
      for (Index i : sidx) coupled = coupled || x(i, j) != 0.0;
      if (coupled) widx.push_back(j);
    }
    const Matrix a_sw = gather(x, sidx, widx);
    Matrix phi_s(sidx.size(), phi.cols()), phi_w(widx.size(), phi.cols());
    for (std::size_t i = 0; i < sidx.size(); ++i) phi_s.row(i) = phi_ext.row(sidx[i]);
    for (std::size_t i = 0; i < widx.size(); ++i) phi_w.row(i) = phi_ext.row(widx[i]);
    const LowRankFactor f = compress_step(cfg, a_sw, phi_s, phi_w, eps);
    const Index r = f.rank();
    const Matrix approx = f.U * f.Rt;
    tr.step_errors_fro.push_back((a_sw - approx).norm());

    // K_i - E_i: the well-separated block becomes U R^T.
    for (std::size_t j = 0; j < widx.size(); ++j)
      for (std::size_t i = 0; i < sidx.size(); ++i) {
        x(sidx[i], widx[j]) = approx(i, j);
        x(widx[j], sidx[i]) = approx(i, j);
      }

    // Append black b and red rr with C = [[0, -I], [-I, 0]] in both x and k1.
    if (m + 2 * r > cap) throw Error("extended trace ran out of room");
    const std::vector<Index> bidx = range(m, m + r);
    const std::vector<Index> ridx = range(m + r, m + 2 * r);
    m += 2 * r;
    for (Index k = 0; k < r; ++k) {
      x(bidx[k], ridx[k]) = x(ridx[k], bidx[k]) = -1.0;
      k1(bidx[k], ridx[k]) = k1(ridx[k], bidx[k]) = -1.0;
      owner[bidx[k]] = s;
      owner[ridx[k]] = s;
      alive[ridx[k]] = 1;
    }
    if (phi.cols() > 0) {
      const Matrix pr = f.U.transpose() * phi_s;
      for (Index k = 0; k < r; ++k) phi_ext.row(ridx[k]) = pr.row(k);
    }

    // x <- U^{-1} x U^{-T} with U = I + U at (s, rr) + R at (w, b), and t <- t U.
    // Rows first, then columns.
    for (std::size_t i = 0; i < sidx.size(); ++i)
      for (Index k = 0; k < r; ++k) x.row(sidx[i]) -= f.U(i, k) * x.row(ridx[k]);
    for (std::size_t j = 0; j < widx.size(); ++j)
      for (Index k = 0; k < r; ++k) x.row(widx[j]) -= f.Rt(k, j) * x.row(bidx[k]);
    for (std::size_t i = 0; i < sidx.size(); ++i)
      for (Index k = 0; k < r; ++k) x.col(sidx[i]) -= f.U(i, k) * x.col(ridx[k]);
    for (std::size_t j = 0; j < widx.size(); ++j)
      for (Index k = 0; k < r; ++k) x.col(widx[j]) -= f.Rt(k, j) * x.col(bidx[k]);
    // U R^T - U R^T cancels up to rounding; keep the decoupling exact so
    // later steps do not pick up round-off couplings.
    for (Index j : widx)
      for (Index i : sidx) x(i, j) = x(j, i) = 0.0;
    for (Index k = 0; k < r; ++k) {
      for (std::size_t i = 0; i < sidx.size(); ++i) t.col(ridx[k]) += f.U(i, k) * t.col(sidx[i]);
      for (std::size_t j = 0; j < widx.size(); ++j) t.col(bidx[k]) += f.Rt(k, j) * t.col(widx[j]);
    }

    // Eliminate the pivot (s, b): x <- L^{-1} x L^{-T}, t <- t L.
    std::vector<Index> piv = sidx;
    piv.insert(piv.end(), bidx.begin(), bidx.end());
    for (Index i : piv) alive[i] = 0;
    std::vector<Index> rest;
    for (Index j = 0; j < m; ++j) {
      if (!alive[j]) continue;
      bool coupled = false;
      for (Index i : piv) coupled = coupled || x(j, i) != 0.0;
      if (coupled) rest.push_back(j);
    }
    const Matrix p = gather(x, piv, piv);
    const Matrix b = gather(x, rest, piv);
    Eigen::FullPivLU<Matrix> lu(p);
    if (!lu.isInvertible()) throw Error("singular pivot in the extended trace at super " + std::to_string(s));
    const Matrix lfac = lu.solve(Matrix(b.transpose())).transpose(); // B P^{-1}
    const Matrix upd = lfac * b.transpose();
    for (std::size_t j = 0; j < rest.size(); ++j) {
      for (std::size_t i = 0; i < rest.size(); ++i) x(rest[i], rest[j]) -= upd(i, j);
      for (Index i : piv) x(rest[j], i) = x(i, rest[j]) = 0.0;
    }
    for (std::size_t q = 0; q < piv.size(); ++q)
      for (std::size_t j = 0; j < rest.size(); ++j) t.col(piv[q]) += lfac(j, q) * t.col(rest[j]);
  }

  tr.extended_dim = m;
  const Index c = m - n;
  tr.k1 = k1.topLeftCorner(m, m);
  tr.kh = t.topLeftCorner(m, m) * x.topLeftCorner(m, m) * t.topLeftCorner(m, m).transpose();
  tr.e = tr.k1 - tr.kh;
  tr.e_fro = tr.e.norm();
  tr.e_cc_fro = tr.e.bottomRightCorner(c, c).norm();

  const Matrix kcc = tr.kh.bottomRightCorner(c, c);
  const Matrix kcf = tr.kh.bottomLeftCorner(c, n);
  Matrix a_hp = tr.kh.topLeftCorner(n, n);
  if (c > 0) {
    Eigen::FullPivLU<Matrix> lu(kcc);
    const Matrix m1 = lu.solve(kcf);
    a_hp -= kcf.transpose() * m1;
    tr.kcc_inv_kcf_fro = m1.norm();
    tr.kcc_inv_fro = lu.inverse().norm();
  }
  tr.a_h.resize(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) tr.a_h(perm[i], perm[j]) = a_hp(i, j);
  tr.measured_fro = (ad - tr.a_h).norm();

  const double factor = std::sqrt(1.0 + 2.0 * tr.kcc_inv_kcf_fro * tr.kcc_inv_kcf_fro);
  for (double e : tr.step_errors_fro) tr.step_sum_fro += std::sqrt(2.0) * e;
  tr.theorem1_bound = factor * tr.e_fro + tr.kcc_inv_fro * tr.e_fro * tr.e_fro;
  tr.accumulated_bound = factor * tr.step_sum_fro + tr.kcc_inv_fro * tr.step_sum_fro * tr.step_sum_fro;
  return tr;
}

} // namespace lorasp
