#include <doctest.h>

#include <algorithm>
#include <set>

#include <json.hpp>

#include "helpers.hpp"
#include "lorasp/error.hpp"
#include "lorasp/factorization.hpp"
#include "lorasp/hierarchy.hpp"
#include "lorasp/problems.hpp"

using namespace lorasp;

namespace {

Geometry line_geometry(Index n) {
  Geometry g;
  g.dim = 1;
  for (Index i = 0; i < n; ++i) g.coords.push_back(static_cast<double>(i));
  return g;
}

Geometry grid_geometry(Index nx, Index ny) {
  Geometry g;
  g.dim = 2;
  for (Index y = 0; y < ny; ++y)
    for (Index x = 0; x < nx; ++x) {
      g.coords.push_back(static_cast<double>(x));
      g.coords.push_back(static_cast<double>(y));
    }
  return g;
}

std::set<Index> leaf_set(const Bisection& b, Index leaf) {
  return {b.perm.begin() + b.leaf_offsets[leaf], b.perm.begin() + b.leaf_offsets[leaf + 1]};
}

} // namespace

TEST_SUITE("hierarchy") {

TEST_CASE("1D chain n=16 at depth 3 gives 8 contiguous pairs") {
  const SparseSymMatrix a = testing::laplace1d(16);
  const Geometry g = line_geometry(16);
  for (const Geometry* geom : {static_cast<const Geometry*>(nullptr), &g}) {
    const Bisection b = recursive_bisection(a, geom, 3);
    REQUIRE(b.leaf_offsets.size() == 9);
    std::set<std::set<Index>> leaves;
    for (Index l = 0; l < 8; ++l) leaves.insert(leaf_set(b, l));
    std::set<std::set<Index>> expect;
    for (Index i = 0; i < 8; ++i) expect.insert({2 * i, 2 * i + 1});
    CHECK(leaves == expect);
  }
}

TEST_CASE("depth 0 keeps a single cluster") {
  const SparseSymMatrix a = testing::laplace2d(3, 3);
  const Bisection b = recursive_bisection(a, nullptr, 0);
  CHECK(b.leaf_offsets.size() == 2);
  CHECK(leaf_set(b, 0).size() == 9);
  CHECK(b.partition().num_clusters() == 1);
}

TEST_CASE("too deep a tree is rejected") {
  CHECK_THROWS_AS(recursive_bisection(testing::laplace1d(4), nullptr, 3), DepthTooLarge);
}

TEST_CASE("32x32 grid with leaf size 8 has depth 7 and 128 leaves of 8") {
  const Problem p = make_problem("poisson2d:k=32");
  CHECK(depth_for(1024, 8) == 7);
  HierarchyOptions ho;
  ho.predicate = NeighborPredicate::geometric;
  const ClusterHierarchy h = ClusterHierarchy::build(p.a, &*p.geom, ho);
  CHECK(h.depth() == 7);
  CHECK(h.num_reds(7) == 128);
  for (Index i = 0; i < 128; ++i) CHECK(h.red_size(7, i) == 8);
  CHECK(h.max_cluster_size(7) == 8);
}

TEST_CASE("pairing halves the node count and preserves coverage") {
  CHECK(merge_pairs(2).size() == 1);
  CHECK(merge_pairs(128).size() == 64);
  CHECK_THROWS_AS(merge_pairs(3), StructuralError);
  const Problem p = make_problem("poisson2d:k=16");
  const ClusterHierarchy h = ClusterHierarchy::build(p.a, &*p.geom, HierarchyOptions{});
  for (int l = 1; l <= h.depth(); ++l)
    for (const auto& [a, b] : merge_pairs(h.num_reds(l))) {
      const Index s = a / 2;
      CHECK(b == a + 1);
      CHECK(h.red_begin(l, a) == h.red_begin(l - 1, s));
      CHECK(h.red_end(l, b) == h.red_end(l - 1, s));
      CHECK(h.red_end(l, a) == h.red_begin(l, b));
    }
  std::vector<Index> perm(h.perm().begin(), h.perm().end());
  std::sort(perm.begin(), perm.end());
  for (Index i = 0; i < h.n(); ++i) CHECK(perm[i] == i);
}

TEST_CASE("the first super node has no well-separated interactions") {
  for (auto pred : {NeighborPredicate::graph, NeighborPredicate::geometric}) {
    const Problem p = make_problem("poisson2d:k=16");
    HierarchyOptions ho;
    ho.predicate = pred;
    const ClusterHierarchy h = ClusterHierarchy::build(p.a, &*p.geom, ho);
    SolverConfig cfg;
    cfg.predicate = pred;
    double first_norm = -1.0;
    FactorObservers obs;
    obs.on_compress = [&](const CompressEvent& e) {
      if (e.level == h.depth() && e.node == 0) first_norm = e.a_sw.norm();
    };
    factorize(p.a, h, cfg, Matrix(), &obs);
    CHECK(first_norm == 0.0);
  }
}

TEST_CASE("a dense block graph has no well-separated nodes") {
  std::mt19937_64 rng(2);
  const SparseSymMatrix a = SparseSymMatrix::from_dense(testing::random_spd(32, rng));
  HierarchyOptions ho;
  ho.leaf_size = 4;
  const ClusterHierarchy h = ClusterHierarchy::build(a, nullptr, ho);
  for (int l = 1; l <= h.depth(); ++l)
    for (Index s = 0; s < h.num_supers(l); ++s) CHECK(h.super_well_separated(l, s).empty());
}

TEST_CASE("geometric predicate on a 4x4 cluster grid: corner cluster sees its two edge-sharing clusters") {
  const SparseSymMatrix a = testing::laplace2d(8, 8);
  const Geometry g = grid_geometry(8, 8);
  HierarchyOptions ho;
  ho.leaf_size = 4;
  ho.predicate = NeighborPredicate::geometric;
  const ClusterHierarchy h = ClusterHierarchy::build(a, &g, ho);
  REQUIRE(h.depth() == 4);
  const Bisection& b = h.bisection();
  // Oracle: each leaf is a 2x2 block of points (extent 1). Block gaps are
  // 2|delta| - 1 per axis, so only edge-sharing blocks lie within distance 1;
  // diagonal blocks sit at sqrt(2).
  auto block_of = [&](Index leaf) {
    const Index p = b.perm[b.leaf_offsets[leaf]];
    return std::pair<Index, Index>{(p % 8) / 2, (p / 8) / 2};
  };
  for (Index leaf = 0; leaf < 16; ++leaf) {
    const auto [bx, by] = block_of(leaf);
    for (Index q : leaf_set(b, leaf)) CHECK(((q % 8) / 2 == bx && (q / 8) / 2 == by));
  }
  for (Index leaf = 0; leaf < 16; ++leaf) {
    const auto [bx, by] = block_of(leaf);
    std::set<Index> expect;
    for (Index other = 0; other < 16; ++other) {
      const auto [ox, oy] = block_of(other);
      if (std::abs(ox - bx) + std::abs(oy - by) == 1) expect.insert(other);
    }
    const auto& nb = h.tree_neighbors(4, leaf);
    CHECK(std::set<Index>(nb.begin(), nb.end()) == expect);
    if (bx == 0 && by == 0) CHECK(expect.size() == 2);
  }
}

TEST_CASE("neighbor lists are symmetric and the tree is deterministic") {
  const Problem p = make_problem("poisson2d:k=20:coeff=random:seed=4");
  for (auto pred : {NeighborPredicate::graph, NeighborPredicate::geometric}) {
    HierarchyOptions ho;
    ho.predicate = pred;
    const ClusterHierarchy h1 = ClusterHierarchy::build(p.a, &*p.geom, ho);
    const ClusterHierarchy h2 = ClusterHierarchy::build(p.a, &*p.geom, ho);
    CHECK(std::equal(h1.perm().begin(), h1.perm().end(), h2.perm().begin()));
    for (int t = 0; t <= h1.depth(); ++t)
      for (Index i = 0; i < h1.num_reds(t); ++i)
        for (Index j : h1.tree_neighbors(t, i)) {
          const auto& back = h1.tree_neighbors(t, j);
          CHECK(std::find(back.begin(), back.end(), i) != back.end());
        }
    const auto j = nlohmann::json::parse(h1.to_json());
    CHECK(j["depth"].get<int>() == h1.depth());
  }
}

TEST_CASE("classify_interactions splits by the neighbor lists") {
  const Problem p = make_problem("poisson2d:k=16");
  HierarchyOptions ho;
  ho.predicate = NeighborPredicate::geometric;
  const ClusterHierarchy h = ClusterHierarchy::build(p.a, &*p.geom, ho);
  const int l = h.depth();
  std::vector<Index> owners;
  for (Index s = 0; s < h.num_supers(l); ++s) owners.push_back(s);
  const auto [nb, ws] = h.classify_interactions(l, 5, owners);
  CHECK(nb.size() + ws.size() + 1 == owners.size());
  for (Index pos : nb) CHECK(h.is_neighbor(l, 5, owners[pos]));
  for (Index pos : ws) CHECK_FALSE(h.is_neighbor(l, 5, owners[pos]));
  const auto wsep = h.super_well_separated(l, 5);
  CHECK(wsep.size() == ws.size());
}

}
