#include "lorasp/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "lorasp/error.hpp"

namespace lorasp {

int depth_for(Index n, Index leaf_size) {
  if (leaf_size < 1) throw InvalidArgument("leaf size must be at least 1");
  int l = 0;
  while ((n >> (l + 1)) >= leaf_size && (Index{1} << (l + 1)) <= n) ++l;
  return l;
}

ClusterPartition Bisection::partition() const {
  const Index leaves = static_cast<Index>(leaf_offsets.size()) - 1;
  std::vector<Index> label(perm.size());
  for (Index c = 0; c < leaves; ++c)
    for (Index p = leaf_offsets[c]; p < leaf_offsets[c + 1]; ++p) label[perm[p]] = c;
  return ClusterPartition::from_labels(std::move(label), leaves);
}

namespace {

struct Splitter {
  const SparseSymMatrix& a;
  const Geometry* geom;
  std::vector<Index> stamp;
  std::vector<Index> level;
  Index tick = 0;

  // Reorders idx so that its first half is one side of the cut.
  void split(std::vector<Index>::iterator b, std::vector<Index>::iterator e) {
    if (geom) split_geometric(b, e);
    else split_graph(b, e);
  }

  void split_geometric(std::vector<Index>::iterator b, std::vector<Index>::iterator e) {
    const int d = geom->dim;
    int axis = 0;
    double best = -1.0;
    for (int k = 0; k < d; ++k) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (auto it = b; it != e; ++it) {
        lo = std::min(lo, geom->point(*it)[k]);
        hi = std::max(hi, geom->point(*it)[k]);
      }
      if (hi - lo > best) {
        best = hi - lo;
        axis = k;
      }
    }
    std::sort(b, e, [&](Index x, Index y) {
      const double cx = geom->point(x)[axis], cy = geom->point(y)[axis];
      return cx != cy ? cx < cy : x < y;
    });
  }

  // BFS from `root` restricted to vertices stamped with `tick`; returns visit order.
  std::vector<Index> bfs(Index root, Index count) {
    std::vector<Index> order;
    order.reserve(count);
    const Index seen = -tick;
    const auto ro = a.row_offsets();
    const auto ci = a.col_indices();
    auto visit_from = [&](Index r) {
      std::size_t head = order.size();
      stamp[r] = seen;
      level[r] = 0;
      order.push_back(r);
      while (head < order.size()) {
        const Index v = order[head++];
        for (Index p = ro[v]; p < ro[v + 1]; ++p) {
          const Index w = ci[p];
          if (stamp[w] == tick) {
            stamp[w] = seen;
            level[w] = level[v] + 1;
            order.push_back(w);
          }
        }
      }
    };
    visit_from(root);
    return order;
  }

  void split_graph(std::vector<Index>::iterator b, std::vector<Index>::iterator e) {
    const Index m = e - b;
    std::sort(b, e);
    // Pseudo-peripheral start: repeat BFS from the last reached vertex while
    // the eccentricity grows.
    Index root = *b;
    Index ecc = -1;
    std::vector<Index> order;
    for (int pass = 0; pass < 4; ++pass) {
      ++tick;
      for (auto it = b; it != e; ++it) stamp[*it] = tick;
      order = bfs(root, m);
      const Index far = order.back();
      if (level[far] <= ecc) break;
      ecc = level[far];
      root = far;
    }
    ++tick;
    for (auto it = b; it != e; ++it) stamp[*it] = tick;
    order = bfs(root, m);
    // Disconnected pieces are appended in index order.
    for (auto it = b; it != e && static_cast<Index>(order.size()) < m; ++it) {
      if (stamp[*it] == tick) {
        auto more = bfs(*it, m);
        order.insert(order.end(), more.begin(), more.end());
      }
    }
    std::copy(order.begin(), order.end(), b);
  }

  void recurse(std::vector<Index>& idx, Index lo, Index hi, int depth, std::vector<Index>& offsets) {
    if (depth == 0) {
      offsets.push_back(hi);
      return;
    }
    split(idx.begin() + lo, idx.begin() + hi);
    const Index mid = lo + (hi - lo) / 2;
    recurse(idx, lo, mid, depth - 1, offsets);
    recurse(idx, mid, hi, depth - 1, offsets);
  }
};

double box_distance(const double* lo_a, const double* hi_a, const double* lo_b, const double* hi_b, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) {
    const double gap = std::max({0.0, lo_b[k] - hi_a[k], lo_a[k] - hi_b[k]});
    s += gap * gap;
  }
  return std::sqrt(s);
}

} // namespace

Bisection recursive_bisection(const SparseSymMatrix& a, const Geometry* geom, int depth) {
  if (depth < 0) throw InvalidArgument("negative tree depth");
  if (depth >= 62 || (Index{1} << depth) > a.n())
    throw DepthTooLarge("2^" + std::to_string(depth) + " leaves exceed n = " + std::to_string(a.n()));
  if (geom && geom->size() != a.n()) throw DimensionMismatch("geometry has a different number of points");
  Splitter sp{a, geom, std::vector<Index>(a.n(), 0), std::vector<Index>(a.n(), 0)};
  Bisection out;
  out.depth = depth;
  out.perm.resize(a.n());
  std::iota(out.perm.begin(), out.perm.end(), Index{0});
  out.leaf_offsets.push_back(0);
  sp.recurse(out.perm, 0, a.n(), depth, out.leaf_offsets);
  return out;
}

std::vector<std::pair<Index, Index>> merge_pairs(Index num_reds) {
  if (num_reds % 2 != 0) throw StructuralError("odd number of red nodes cannot be paired");
  std::vector<std::pair<Index, Index>> s;
  for (Index i = 0; i < num_reds / 2; ++i) s.emplace_back(2 * i, 2 * i + 1);
  return s;
}

ClusterHierarchy ClusterHierarchy::build(const SparseSymMatrix& a, const Geometry* geom,
                                         const HierarchyOptions& opts) {
  const int depth = opts.depth >= 0 ? opts.depth : depth_for(a.n(), opts.leaf_size);
  if (opts.predicate == NeighborPredicate::geometric && !geom)
    throw InvalidArgument("geometric neighbor predicate needs coordinates");

  ClusterHierarchy h;
  h.predicate_ = opts.predicate;
  h.bis_ = recursive_bisection(a, geom, depth);
  h.iperm_.resize(a.n());
  for (Index i = 0; i < a.n(); ++i) h.iperm_[h.bis_.perm[i]] = i;

  const Index leaves = Index{1} << depth;
  std::vector<Index> leaf_of(a.n());
  for (Index c = 0; c < leaves; ++c)
    for (Index p = h.bis_.leaf_offsets[c]; p < h.bis_.leaf_offsets[c + 1]; ++p) leaf_of[h.bis_.perm[p]] = c;

  // Graph adjacency of the leaves, then coarsened level by level.
  h.nbrs_.resize(depth + 1);
  std::vector<std::vector<std::vector<Index>>> graph(depth + 1);
  graph[depth].resize(leaves);
  {
    const auto ro = a.row_offsets();
    const auto ci = a.col_indices();
    for (Index i = 0; i < a.n(); ++i)
      for (Index p = ro[i]; p < ro[i + 1]; ++p)
        if (leaf_of[i] != leaf_of[ci[p]]) graph[depth][leaf_of[i]].push_back(leaf_of[ci[p]]);
  }
  for (int t = depth; t >= 0; --t) {
    if (t < depth) {
      graph[t].resize(Index{1} << t);
      for (Index c = 0; c < (Index{1} << (t + 1)); ++c)
        for (Index o : graph[t + 1][c])
          if ((o >> 1) != (c >> 1)) graph[t][c >> 1].push_back(o >> 1);
    }
    for (auto& adj : graph[t]) {
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
  }

  if (opts.predicate == NeighborPredicate::graph) {
    h.nbrs_ = std::move(graph);
    return h;
  }

  // Geometric: bounding boxes per tree node; neighbors are pairs whose box
  // distance does not exceed the larger box extent, plus graph neighbors.
  // Children of neighbors are the only candidates since boxes only shrink.
  const int d = geom->dim;
  std::vector<std::vector<double>> lo(depth + 1), hi(depth + 1);
  lo[depth].assign(leaves * d, std::numeric_limits<double>::infinity());
  hi[depth].assign(leaves * d, -std::numeric_limits<double>::infinity());
  for (Index i = 0; i < a.n(); ++i)
    for (int k = 0; k < d; ++k) {
      lo[depth][leaf_of[i] * d + k] = std::min(lo[depth][leaf_of[i] * d + k], geom->point(i)[k]);
      hi[depth][leaf_of[i] * d + k] = std::max(hi[depth][leaf_of[i] * d + k], geom->point(i)[k]);
    }
  for (int t = depth - 1; t >= 0; --t) {
    const Index m = Index{1} << t;
    lo[t].resize(m * d);
    hi[t].resize(m * d);
    for (Index c = 0; c < m; ++c)
      for (int k = 0; k < d; ++k) {
        lo[t][c * d + k] = std::min(lo[t + 1][2 * c * d + k], lo[t + 1][(2 * c + 1) * d + k]);
        hi[t][c * d + k] = std::max(hi[t + 1][2 * c * d + k], hi[t + 1][(2 * c + 1) * d + k]);
      }
  }
  auto extent = [&](int t, Index c) {
    double e = 0.0;
    for (int k = 0; k < d; ++k) e = std::max(e, hi[t][c * d + k] - lo[t][c * d + k]);
    return e;
  };
  h.nbrs_[0].resize(1);
  for (int t = 1; t <= depth; ++t) {
    const Index m = Index{1} << t;
    h.nbrs_[t].resize(m);
    for (Index c = 0; c < m; ++c) {
      const Index p = c >> 1;
      std::vector<Index> cand{2 * p, 2 * p + 1};
      for (Index q : h.nbrs_[t - 1][p]) {
        cand.push_back(2 * q);
        cand.push_back(2 * q + 1);
      }
      std::vector<Index>& out = h.nbrs_[t][c];
      for (Index o : cand) {
        if (o == c) continue;
        const double dist = box_distance(&lo[t][c * d], &hi[t][c * d], &lo[t][o * d], &hi[t][o * d], d);
        if (dist <= std::max(extent(t, c), extent(t, o)) ||
            std::binary_search(graph[t][c].begin(), graph[t][c].end(), o))
          out.push_back(o);
      }
      std::sort(out.begin(), out.end());
    }
  }
  return h;
}

Index ClusterHierarchy::max_cluster_size(int level) const {
  Index m = 0;
  for (Index i = 0; i < num_reds(level); ++i) m = std::max(m, red_size(level, i));
  return m;
}

std::vector<Index> ClusterHierarchy::super_well_separated(int level, Index s) const {
  std::vector<Index> out;
  const auto& nb = super_neighbors(level, s);
  for (Index j = 0; j < num_supers(level); ++j)
    if (j != s && !std::binary_search(nb.begin(), nb.end(), j)) out.push_back(j);
  return out;
}

bool ClusterHierarchy::is_neighbor(int level, Index s, Index owner) const {
  if (owner == s) return true;
  const auto& nb = super_neighbors(level, s);
  return std::binary_search(nb.begin(), nb.end(), owner);
}

std::pair<std::vector<Index>, std::vector<Index>>
ClusterHierarchy::classify_interactions(int level, Index s, std::span<const Index> owners) const {
  std::pair<std::vector<Index>, std::vector<Index>> out;
  for (Index k = 0; k < static_cast<Index>(owners.size()); ++k) {
    if (owners[k] == s) continue;
    (is_neighbor(level, s, owners[k]) ? out.first : out.second).push_back(k);
  }
  return out;
}

std::string ClusterHierarchy::to_json() const {
  nlohmann::json j;
  j["n"] = n();
  j["depth"] = depth();
  j["predicate"] = predicate_ == NeighborPredicate::graph ? "graph" : "geometric";
  j["leaf_offsets"] = bis_.leaf_offsets;
  nlohmann::json levels = nlohmann::json::array();
  for (int l = 0; l <= depth(); ++l) {
    nlohmann::json lv;
    lv["level"] = l;
    lv["reds"] = num_reds(l);
    lv["max_cluster_size"] = max_cluster_size(l);
    if (l > 0) {
      nlohmann::json sup = nlohmann::json::array();
      for (Index s = 0; s < num_supers(l); ++s)
        sup.push_back({{"id", s}, {"size", red_size(l - 1, s)}, {"neighbors", super_neighbors(l, s)}});
      lv["supers"] = std::move(sup);
    }
    levels.push_back(std::move(lv));
  }
  j["levels"] = std::move(levels);
  return j.dump(1);
}

} // namespace lorasp
