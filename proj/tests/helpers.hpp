#pragma once

#include <random>

#include "lorasp/sparse.hpp"

namespace testing {

using lorasp::Index;
using lorasp::Matrix;
using lorasp::SparseSymMatrix;
using lorasp::Vector;

inline Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = d(rng);
  return m;
}

inline Matrix random_spd(Index n, std::mt19937_64& rng) {
  const Matrix g = gaussian(n, n, rng);
  return g * g.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
}

// 1D three-point Laplacian with diagonal 2 and off-diagonals -1.
inline SparseSymMatrix laplace1d(Index n) {
  std::vector<lorasp::Triplet> t;
  for (Index i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
  }
  return SparseSymMatrix::from_triplets(n, t, true);
}

// Five-point Laplacian on an nx x ny grid, x fastest.
inline SparseSymMatrix laplace2d(Index nx, Index ny) {
  std::vector<lorasp::Triplet> t;
  for (Index y = 0; y < ny; ++y)
    for (Index x = 0; x < nx; ++x) {
      const Index i = x + nx * y;
      t.push_back({i, i, 4.0});
      if (x > 0) t.push_back({i, i - 1, -1.0});
      if (y > 0) t.push_back({i, i - nx, -1.0});
    }
  return SparseSymMatrix::from_triplets(nx * ny, t, true);
}

inline double rel(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

} // namespace testing
