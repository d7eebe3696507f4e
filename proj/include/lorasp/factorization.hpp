#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lorasp/dense.hpp"
#include "lorasp/hierarchy.hpp"
#include "lorasp/sparse.hpp"

namespace lorasp {

enum class EpsSchedule {
  constant,
  leaf_anchored, // eps * 2^((l - l_max)/3)
  root_anchored  // eps * h * 2^((l_max - l)/3)
};

enum class SolverMode { lorasp, gc_constant, gc_eigenvector, gc_user };

enum class PreservationStyle {
  exact,      // preserved vectors kept in span(U) exactly
  approximate // projection scheme with tolerance eps1
};

const char* schedule_name(EpsSchedule s);
const char* mode_name(SolverMode m);
EpsSchedule parse_schedule(const std::string& s);
SolverMode parse_mode(const std::string& s);

struct SolverConfig {
  double eps = 0.1;
  EpsSchedule eps_schedule = EpsSchedule::constant;
  Index leaf_size = 8;
  SolverMode mode = SolverMode::lorasp;
  NeighborPredicate predicate = NeighborPredicate::graph;
  PreservationStyle preservation = PreservationStyle::exact;
  ProjectionScheme scheme = ProjectionScheme::second_order_symmetric;
  double eps1 = 0.0;
  // absolute_frobenius turns eps_l into an absolute Frobenius threshold.
  Tolerance tolerance = Tolerance::relative_2norm;
  double h = 0.0;        // mesh width for the root-anchored schedule; 0 uses 1/(sqrt(n)+1)
  int max_levels = -1;   // levels eliminated before the dense root; -1 for all
  Index max_factor_entries = 0; // 0: unlimited

  bool preserving() const { return mode != SolverMode::lorasp; }
  void validate() const;
};

double eps_for_level(const SolverConfig& cfg, int l, int l_max, double h);

/// One compression of the well-separated block A_sw at tolerance eps_l:
/// plain truncated SVD for LoRaSp, otherwise a compression that keeps phi_s
/// and A_sw phi_w (exactly or through the configured projection scheme).
/// An empty A_sw gives rank 0.
LowRankFactor compress_step(const SolverConfig& cfg, const Matrix& a_sw, const Matrix& phi_s, const Matrix& phi_w,
                            double eps_l);

/// Stored coupling A(s, target) of an eliminated super node to a remaining
/// neighbor: another super node of the same level or a parent red node.
struct Coupling {
  bool to_parent = false;
  Index node = 0;
  Index offset = 0; // into the super or parent work vector of the level
  Matrix block;     // dim(s) x dim(target)
};

struct NodeFactor {
  int level = 0;
  Index id = 0;
  Index offset = 0;
  Index dim = 0;
  Index parent_offset = 0;
  Index rank = 0;
  SpdFactor ass;   // A_ss
  Matrix U;        // dim x rank
  Matrix W;        // A_ss^{-1} U
  SpdFactor schur; // S = U^T A_ss^{-1} U
  std::vector<Coupling> couplings;

  /// P_ss r = S^{-1} U^T A_ss^{-1} r
  Matrix restrict_to_parent(const Matrix& r) const;
  /// M_ss r = A_ss^{-1} r - P_ss^T S P_ss r
  Matrix local_solve(const Matrix& r) const;
  Index entries() const;
};

struct LevelFactor {
  int level = 0;
  double eps = 0.0;
  Index super_size = 0;  // length of the level's work vector
  Index parent_size = 0; // length of the next level's work vector
  std::vector<NodeFactor> nodes;
};

struct LevelStats {
  int level = 0;
  Index nodes = 0;
  Index max_rank = 0;
  double mean_rank = 0.0;
  Index d = 0;        // largest red node dimension at this level
  double d_ratio = 0; // d_l / d_{l+1}, 0 at the leaves
  double eps = 0.0;
  Index fill_entries = 0;   // entries of the active off-diagonal blocks before elimination
  Index factor_entries = 0; // entries stored by this level's factors
  double max_step_error = 0.0; // max over nodes of ||E_sw||_2 / ||A_sw||_2
};

struct CompressEvent {
  int level;
  Index node;
  double eps;
  const Matrix& a_sw;
  const Matrix& phi_s;
  const Matrix& phi_w;
  const LowRankFactor& factor;
  Index num_neighbors;
  Index num_well_separated;
};

struct StepEvent {
  int level;
  Index node;
  // Dense assembly of the remaining active system (alive nodes in id order).
  std::function<Matrix()> remaining;
};

struct FactorObservers {
  std::function<void(const CompressEvent&)> on_compress;
  std::function<void(const StepEvent&)> on_step;
};

class HFactorization {
public:
  Index n() const { return static_cast<Index>(perm_.size()); }
  int depth() const { return depth_; }
  const SolverConfig& config() const { return cfg_; }
  std::span<const Index> perm() const { return perm_; }
  const std::vector<LevelFactor>& levels() const { return levels_; }
  const std::vector<LevelStats>& stats() const { return stats_; }
  const SpdFactor& root() const { return root_; }
  Index factor_entries() const;
  std::string stats_json() const;

  /// x = A_H^{-1} b. Reentrant; identical inputs give bitwise identical output.
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;

private:
  friend HFactorization factorize(const SparseSymMatrix&, const ClusterHierarchy&, const SolverConfig&,
                                  const Matrix&, const FactorObservers*);
  SolverConfig cfg_;
  int depth_ = 0;
  std::vector<Index> perm_;
  std::vector<LevelFactor> levels_; // elimination order: leaves first
  std::vector<LevelStats> stats_;
  SpdFactor root_;
};

/// Setup phase. `preserve` holds vectors (columns, original ordering) to keep
/// exactly in GC modes; gc_constant uses the all-ones vector when it is empty.
HFactorization factorize(const SparseSymMatrix& a, const ClusterHierarchy& hier, const SolverConfig& cfg,
                         const Matrix& preserve = Matrix(), const FactorObservers* obs = nullptr);

/// Linear operator view of A_H^{-1} for Krylov methods.
std::function<Vector(const Vector&)> as_linear_operator(const HFactorization& h);

} // namespace lorasp
