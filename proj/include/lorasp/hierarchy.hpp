#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lorasp/sparse.hpp"

namespace lorasp {

/// Point coordinates for each unknown, row-major (n x dim).
struct Geometry {
  int dim = 0;
  std::vector<double> coords;

  Index size() const { return dim == 0 ? 0 : static_cast<Index>(coords.size()) / dim; }
  const double* point(Index i) const { return coords.data() + i * dim; }
};

enum class NeighborPredicate { graph, geometric };

struct HierarchyOptions {
  Index leaf_size = 8;
  int depth = -1; // -1: derive from leaf_size
  NeighborPredicate predicate = NeighborPredicate::graph;
};

/// Largest L with n / 2^L >= leaf_size (0 when n < 2 * leaf_size).
int depth_for(Index n, Index leaf_size);

struct Bisection {
  int depth = 0;
  std::vector<Index> perm;         // perm[new] = old
  std::vector<Index> leaf_offsets; // 2^depth + 1 offsets into the new ordering

  ClusterPartition partition() const; // leaf clusters over original indices
};

/// Splits into 2^depth nonempty leaves listed in depth-first order, so that
/// leaves 2i and 2i+1 are siblings. With geometry the longest box axis is cut
/// at the median; otherwise a BFS level-set ordering from a pseudo-peripheral
/// vertex is cut in half.
Bisection recursive_bisection(const SparseSymMatrix& a, const Geometry* geom, int depth);

/// Super i at a level is the union of reds 2i and 2i+1.
std::vector<std::pair<Index, Index>> merge_pairs(Index num_reds);

/// Cluster tree over the permuted unknowns. Levels are numbered from the root
/// (0) to the leaves (depth). Red node i at level l covers leaves
/// [i 2^(depth-l), (i+1) 2^(depth-l)); super node i at level l covers the same
/// unknowns as red node i at level l-1, and so does its parent red node.
class ClusterHierarchy {
public:
  static ClusterHierarchy build(const SparseSymMatrix& a, const Geometry* geom, const HierarchyOptions& opts);

  Index n() const { return static_cast<Index>(bis_.perm.size()); }
  int depth() const { return bis_.depth; }
  NeighborPredicate predicate() const { return predicate_; }
  std::span<const Index> perm() const { return bis_.perm; }
  std::span<const Index> iperm() const { return iperm_; }
  const Bisection& bisection() const { return bis_; }

  Index num_reds(int level) const { return Index{1} << level; }
  Index num_supers(int level) const { return level == 0 ? 0 : Index{1} << (level - 1); }
  Index red_begin(int level, Index i) const { return bis_.leaf_offsets[i << (depth() - level)]; }
  Index red_end(int level, Index i) const { return bis_.leaf_offsets[(i + 1) << (depth() - level)]; }
  Index red_size(int level, Index i) const { return red_end(level, i) - red_begin(level, i); }
  /// Largest red cluster at the level, counted in original unknowns.
  Index max_cluster_size(int level) const;

  /// Neighbor list of tree node i at tree level t (sorted, self excluded).
  const std::vector<Index>& tree_neighbors(int t, Index i) const { return nbrs_[t][i]; }
  /// Neighbors of super node s at level l; parent red nodes inherit these.
  const std::vector<Index>& super_neighbors(int level, Index s) const { return nbrs_[level - 1][s]; }
  /// Super nodes (or their parents) at the level not adjacent to s; computed on demand.
  std::vector<Index> super_well_separated(int level, Index s) const;

  /// True when the node owned by super `owner` interacts with super s as a neighbor.
  bool is_neighbor(int level, Index s, Index owner) const;

  /// Splits active nodes, given by their owning super ids, into neighbors and
  /// well-separated positions within `owners`. The super itself is skipped.
  std::pair<std::vector<Index>, std::vector<Index>> classify_interactions(int level, Index s,
                                                                          std::span<const Index> owners) const;

  std::string to_json() const;

private:
  Bisection bis_;
  std::vector<Index> iperm_;
  NeighborPredicate predicate_ = NeighborPredicate::graph;
  std::vector<std::vector<std::vector<Index>>> nbrs_; // [tree level][node]
};

} // namespace lorasp
