#include "lorasp/sparse.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "lorasp/error.hpp"
#include "lorasp/kernels.hpp"

namespace lorasp {

SparseSymMatrix SparseSymMatrix::from_triplets(Index n, std::vector<Triplet> entries, bool lower_only) {
  if (n < 0) throw InvalidArgument("negative dimension");
  if (lower_only) {
    const std::size_t m = entries.size();
    for (std::size_t k = 0; k < m; ++k) {
      const Triplet t = entries[k];
      if (t.col > t.row) throw StructuralError("entry above the diagonal in lower-triangle input");
      if (t.col != t.row) entries.push_back({t.col, t.row, t.value});
    }
  }
  for (const Triplet& t : entries)
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) throw DimensionMismatch("entry index out of range");

  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });

  SparseSymMatrix m;
  m.n_ = n;
  m.row_offsets_.assign(n + 1, 0);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Triplet& t = entries[k];
    if (!m.col_indices_.empty() && k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
      m.values_.back() += t.value;
      continue;
    }
    m.col_indices_.push_back(t.col);
    m.values_.push_back(t.value);
    ++m.row_offsets_[t.row + 1];
  }
  for (Index i = 0; i < n; ++i) m.row_offsets_[i + 1] += m.row_offsets_[i];

  for (Index i = 0; i < n; ++i) {
    bool has_diag = false;
    for (Index p = m.row_offsets_[i]; p < m.row_offsets_[i + 1]; ++p) {
      const Index j = m.col_indices_[p];
      if (j == i) has_diag = true;
      else if (!lower_only && j > i && m.coeff(j, i) != m.values_[p]) {
        throw StructuralError("matrix is not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
    if (!has_diag) throw StructuralError("row " + std::to_string(i) + " has no diagonal entry");
  }
  if (!lower_only) {
    // Structural symmetry: a (j,i) counterpart must exist for every (i,j).
    for (Index i = 0; i < n; ++i)
      for (Index p = m.row_offsets_[i]; p < m.row_offsets_[i + 1]; ++p) {
        const Index j = m.col_indices_[p];
        const auto b = m.col_indices_.begin() + m.row_offsets_[j];
        const auto e = m.col_indices_.begin() + m.row_offsets_[j + 1];
        if (!std::binary_search(b, e, i)) throw StructuralError("matrix is not structurally symmetric");
      }
  }
  return m;
}

SparseSymMatrix SparseSymMatrix::from_dense(const Matrix& d, double drop_tol) {
  if (d.rows() != d.cols()) throw DimensionMismatch("dense matrix is not square");
  std::vector<Triplet> t;
  for (Index i = 0; i < d.rows(); ++i)
    for (Index j = 0; j <= i; ++j)
      if (i == j || std::abs(d(i, j)) > drop_tol) t.push_back({i, j, d(i, j)});
  return from_triplets(d.rows(), std::move(t), true);
}

SparseSymMatrix SparseSymMatrix::identity(Index n) {
  std::vector<Triplet> t;
  for (Index i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, std::move(t), true);
}

double SparseSymMatrix::coeff(Index i, Index j) const {
  const auto b = col_indices_.begin() + row_offsets_[i];
  const auto e = col_indices_.begin() + row_offsets_[i + 1];
  const auto it = std::lower_bound(b, e, j);
  if (it == e || *it != j) return 0.0;
  return values_[it - col_indices_.begin()];
}

Vector SparseSymMatrix::diagonal() const {
  Vector d(n_);
  for (Index i = 0; i < n_; ++i) d(i) = coeff(i, i);
  return d;
}

Matrix SparseSymMatrix::to_dense() const {
  Matrix d = Matrix::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i)
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) d(i, col_indices_[p]) = values_[p];
  return d;
}

SparseSymMatrix SparseSymMatrix::permuted(std::span<const Index> perm) const {
  if (static_cast<Index>(perm.size()) != n_) throw DimensionMismatch("permutation length differs from n");
  std::vector<Index> inv(n_, -1);
  for (Index i = 0; i < n_; ++i) {
    if (perm[i] < 0 || perm[i] >= n_ || inv[perm[i]] != -1) throw InvalidArgument("not a permutation");
    inv[perm[i]] = i;
  }
  SparseSymMatrix m;
  m.n_ = n_;
  m.row_offsets_.assign(n_ + 1, 0);
  m.col_indices_.reserve(col_indices_.size());
  m.values_.reserve(values_.size());
  std::vector<std::pair<Index, double>> row;
  for (Index i = 0; i < n_; ++i) {
    const Index old = perm[i];
    row.clear();
    for (Index p = row_offsets_[old]; p < row_offsets_[old + 1]; ++p) row.emplace_back(inv[col_indices_[p]], values_[p]);
    std::sort(row.begin(), row.end());
    for (const auto& [j, v] : row) {
      m.col_indices_.push_back(j);
      m.values_.push_back(v);
    }
    m.row_offsets_[i + 1] = static_cast<Index>(m.col_indices_.size());
  }
  return m;
}

void SparseSymMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (static_cast<Index>(x.size()) != n_ || static_cast<Index>(y.size()) != n_)
    throw DimensionMismatch("spmv: vector length differs from n");
  kernels::table(kernels::active_isa())
      .csr_spmv(static_cast<std::size_t>(n_), row_offsets_.data(), col_indices_.data(), values_.data(), x.data(),
                y.data());
}

Vector SparseSymMatrix::operator*(const Vector& x) const {
  Vector y(n_);
  multiply(std::span<const double>(x.data(), x.size()), std::span<double>(y.data(), y.size()));
  return y;
}

ClusterPartition ClusterPartition::from_members(Index n, std::vector<std::vector<Index>> members) {
  ClusterPartition p;
  p.cluster_of.assign(n, -1);
  for (Index c = 0; c < static_cast<Index>(members.size()); ++c) {
    std::sort(members[c].begin(), members[c].end());
    for (Index i : members[c]) {
      if (i < 0 || i >= n) throw InvalidPartition("cluster member out of range");
      if (p.cluster_of[i] != -1) throw InvalidPartition("index " + std::to_string(i) + " is in two clusters");
      p.cluster_of[i] = c;
    }
  }
  for (Index i = 0; i < n; ++i)
    if (p.cluster_of[i] == -1) throw InvalidPartition("index " + std::to_string(i) + " is not covered");
  p.members = std::move(members);
  return p;
}

ClusterPartition ClusterPartition::from_labels(std::vector<Index> cluster_of, Index num_clusters) {
  ClusterPartition p;
  p.members.resize(num_clusters);
  for (Index i = 0; i < static_cast<Index>(cluster_of.size()); ++i) {
    const Index c = cluster_of[i];
    if (c < 0 || c >= num_clusters) throw InvalidPartition("index " + std::to_string(i) + " has no valid cluster");
    p.members[c].push_back(i);
  }
  p.cluster_of = std::move(cluster_of);
  return p;
}

Index BlockGraph::num_edges() const {
  Index e = 0;
  for (const auto& a : adjacency) e += static_cast<Index>(a.size());
  return e / 2;
}

bool BlockGraph::adjacent(Index a, Index b) const {
  return std::binary_search(adjacency[a].begin(), adjacency[a].end(), b);
}

BlockGraph build_block_graph(const SparseSymMatrix& a, const ClusterPartition& part) {
  if (static_cast<Index>(part.cluster_of.size()) != a.n())
    throw InvalidPartition("partition size differs from matrix dimension");
  Index covered = 0;
  for (const auto& m : part.members) covered += static_cast<Index>(m.size());
  if (covered != a.n()) throw InvalidPartition("partition does not cover every index exactly once");
  for (Index c : part.cluster_of)
    if (c < 0 || c >= part.num_clusters()) throw InvalidPartition("index without a cluster");

  BlockGraph g;
  g.num_clusters = part.num_clusters();
  g.adjacency.resize(g.num_clusters);
  const auto ro = a.row_offsets();
  const auto ci = a.col_indices();
  for (Index i = 0; i < a.n(); ++i) {
    const Index ca = part.cluster_of[i];
    for (Index p = ro[i]; p < ro[i + 1]; ++p) {
      const Index cb = part.cluster_of[ci[p]];
      if (ca != cb) g.adjacency[ca].push_back(cb);
    }
  }
  for (auto& adj : g.adjacency) {
    std::sort(adj.begin(), adj.end());
    adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
  }
  return g;
}

Matrix extract_block(const SparseSymMatrix& a, std::span<const Index> rows, std::span<const Index> cols) {
  Matrix out = Matrix::Zero(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  if (cols.empty()) return out;
  // Sorted (global column, local position) pairs let each row be merged against cols.
  std::vector<std::pair<Index, Index>> order(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] < 0 || cols[k] >= a.n()) throw DimensionMismatch("column index out of range");
    order[k] = {cols[k], static_cast<Index>(k)};
  }
  std::sort(order.begin(), order.end());
  const auto ro = a.row_offsets();
  const auto ci = a.col_indices();
  const auto va = a.values();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Index i = rows[r];
    if (i < 0 || i >= a.n()) throw DimensionMismatch("row index out of range");
    Index p = ro[i];
    std::size_t q = 0;
    while (p < ro[i + 1] && q < order.size()) {
      if (ci[p] < order[q].first) ++p;
      else if (ci[p] > order[q].first) ++q;
      else {
        out(static_cast<Index>(r), order[q].second) = va[p];
        ++q; // duplicate column requests share the same entry
        while (q < order.size() && order[q].first == ci[p]) out(static_cast<Index>(r), order[q++].second) = va[p];
        ++p;
      }
    }
  }
  return out;
}

Vector spmv(const SparseSymMatrix& a, const Vector& x) {
  if (x.size() != a.n()) throw DimensionMismatch("spmv: vector length differs from n");
  return a * x;
}

double residual_norm(const SparseSymMatrix& a, const Vector& x, const Vector& b) {
  if (x.size() != a.n() || b.size() != a.n()) throw DimensionMismatch("residual: vector length differs from n");
  Vector r = b - a * x;
  return kernels::nrm2(std::span<const double>(r.data(), r.size()));
}

} // namespace lorasp
