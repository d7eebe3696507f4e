#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lorasp/factorization.hpp"
#include "lorasp/problems.hpp"

namespace lorasp {

enum class SolverKind { gmres, stationary };

const char* solver_name(SolverKind s);
SolverKind parse_solver(const std::string& s);

struct BenchRecord {
  std::string problem; // problem label without the size
  Index n = 0;
  int tree_depth = 0;
  double eps = 0.0;
  std::string eps_schedule;
  std::string mode;
  std::string solver;
  Index iterations = 0;
  double final_residual = 0.0;
  double factor_time_s = 0.0;
  double solve_time_s = 0.0;
  Index factor_entries = 0;
  bool converged = false;
  bool diverged = false;
  double final_error = 0.0; // ||x - x*|| / ||x*||
};

inline constexpr const char* kCsvHeader =
    "problem,n,tree_depth,eps,eps_schedule,mode,solver,iterations,final_residual,factor_time_s,solve_time_s,"
    "factor_entries";

struct BenchCase {
  std::string problem; // full problem spec, including the size
  double eps = 0.1;
  SolverMode mode = SolverMode::lorasp;
  SolverKind solver = SolverKind::gmres;
};

struct BenchOptions {
  EpsSchedule eps_schedule = EpsSchedule::constant;
  Index leaf_size = 8;
  std::optional<NeighborPredicate> predicate; // default: geometric for grids, graph otherwise
  std::optional<double> tol;                  // default: 1e-10 GMRES, 1e-6 stationary
  std::optional<Index> max_iter;              // default: 300 GMRES, 1000 stationary
  int max_levels = -1;
  std::uint64_t seed = 1;
  std::string preserve_path; // MatrixMarket vector for gc-user
  int jobs = 1;
};

/// Vectors kept exactly by the given mode (empty for LoRaSp).
Matrix preserved_vectors(const Problem& p, SolverMode mode, const std::string& preserve_path = "");
SolverConfig make_solver_config(const Problem& p, double eps, SolverMode mode, const BenchOptions& opt);
ClusterHierarchy make_hierarchy(const Problem& p, const SolverConfig& cfg);

/// Factorizes and solves A x = A x* with x* drawn from the seed.
BenchRecord run_case(const BenchCase& c, const BenchOptions& opt);
/// All cases (on opt.jobs threads), sorted by problem, n, eps, mode, solver.
std::vector<BenchRecord> run_bench(const std::vector<BenchCase>& cases, const BenchOptions& opt);

void write_csv(std::ostream& os, const std::vector<BenchRecord>& rows);
std::string records_json(const std::vector<BenchRecord>& rows);

/// "n=32..512" -> {32, 64, ..., 512}: grid sizes k doubling between the bounds.
std::vector<Index> parse_sweep(const std::string& s);
/// Replaces (or adds) the k field of a grid spec.
std::string with_grid_size(const std::string& spec, Index k);

} // namespace lorasp
