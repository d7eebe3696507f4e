#pragma once

#include <string>

#include "lorasp/sparse.hpp"

namespace lorasp {

/// Coordinate real symmetric files: the lower triangle is read and mirrored.
/// Malformed input raises ParseError with the offending line.
SparseSymMatrix read_matrix_market(const std::string& path);
/// Writes the lower triangle with 17 significant digits.
void write_matrix_market(const SparseSymMatrix& a, const std::string& path);

/// Dense array format for vectors.
void write_matrix_market_vector(const Vector& x, const std::string& path);
Vector read_matrix_market_vector(const std::string& path);

} // namespace lorasp
