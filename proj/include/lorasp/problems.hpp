#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lorasp/hierarchy.hpp"
#include "lorasp/sparse.hpp"

namespace lorasp {

enum class Coefficient {
  constant,  // alpha everywhere
  piecewise, // 1e-5 on [1/4,3/4]^dim, 1 elsewhere, evaluated at edge midpoints
  random     // one uniform [0,1] value per grid edge
};

/// Finite-difference Poisson problem on the unit cube with k interior points
/// per axis, h = 1/(k+1), Dirichlet boundary eliminated, entries scaled by h^2.
struct GridSpec {
  int dim = 2;
  Index k = 32;
  Coefficient coeff = Coefficient::constant;
  double alpha = 1.0;
  std::uint64_t seed = 0;

  double h() const { return 1.0 / static_cast<double>(k + 1); }
  Index n() const;
};

struct PoissonProblem {
  SparseSymMatrix a;
  Geometry geom;
};

PoissonProblem poisson_matrix(const GridSpec& spec);

/// All eigenvalues of the constant-coefficient operator, ascending.
std::vector<double> analytic_eigenvalues(const GridSpec& spec);

/// Unit-norm eigenvector of the smallest eigenvalue: the sine product for
/// constant coefficients, a dense eigensolve (n <= 4096) otherwise.
Vector smallest_eigenvector(const GridSpec& spec);
Vector smallest_eigenvector(const SparseSymMatrix& a);

inline constexpr Index kDenseLimit = 4096;

/// A benchmark problem parsed from a spec string such as
/// "poisson2d:k=128:coeff=random:seed=7" or "mm:path/to/file.mtx".
struct Problem {
  std::string spec;
  std::string label; // spec without the k field, used to group sweeps
  SparseSymMatrix a;
  std::optional<Geometry> geom;
  std::optional<GridSpec> grid;
};

GridSpec parse_grid_spec(const std::string& spec);
std::string format_grid_spec(const GridSpec& g);
Problem make_problem(const std::string& spec);

} // namespace lorasp
