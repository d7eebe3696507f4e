#pragma once

#include <span>
#include <vector>

#include "lorasp/types.hpp"

namespace lorasp {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Symmetric sparse matrix in CSR form with both triangles stored.
/// Column indices are sorted within each row and every row has a diagonal.
class SparseSymMatrix {
public:
  SparseSymMatrix() = default;

  /// Builds from coordinate entries. Duplicates are summed. With
  /// lower_only, each off-diagonal (i,j), i>j, is mirrored to (j,i) and
  /// entries above the diagonal are rejected. Otherwise the input must
  /// already be symmetric.
  static SparseSymMatrix from_triplets(Index n, std::vector<Triplet> entries, bool lower_only);
  static SparseSymMatrix from_dense(const Matrix& m, double drop_tol = 0.0);
  static SparseSymMatrix identity(Index n);

  Index n() const { return n_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }
  bool symmetric_full_storage() const { return true; }
  std::span<const Index> row_offsets() const { return row_offsets_; }
  std::span<const Index> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  double coeff(Index i, Index j) const;
  Vector diagonal() const;
  Matrix to_dense() const;

  /// B = P A P^T with B(i,j) = A(perm[i], perm[j]).
  SparseSymMatrix permuted(std::span<const Index> perm) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  Vector operator*(const Vector& x) const;

private:
  Index n_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
};

struct ClusterPartition {
  std::vector<Index> cluster_of;
  std::vector<std::vector<Index>> members;

  Index num_clusters() const { return static_cast<Index>(members.size()); }

  /// Validates disjointness and coverage of {0..n-1}; throws InvalidPartition.
  static ClusterPartition from_members(Index n, std::vector<std::vector<Index>> members);
  static ClusterPartition from_labels(std::vector<Index> cluster_of, Index num_clusters);
};

struct BlockGraph {
  Index num_clusters = 0;
  std::vector<std::vector<Index>> adjacency;

  Index num_edges() const;
  bool adjacent(Index a, Index b) const;
};

BlockGraph build_block_graph(const SparseSymMatrix& a, const ClusterPartition& part);
Matrix extract_block(const SparseSymMatrix& a, std::span<const Index> rows, std::span<const Index> cols);
Vector spmv(const SparseSymMatrix& a, const Vector& x);
/// ||b - A x||_2
double residual_norm(const SparseSymMatrix& a, const Vector& x, const Vector& b);

} // namespace lorasp
