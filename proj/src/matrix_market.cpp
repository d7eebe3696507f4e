#include "lorasp/matrix_market.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "lorasp/error.hpp"

namespace lorasp {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  return in;
}

// Returns the next line that is not a comment; tracks line numbers.
bool next_data_line(std::istream& in, std::string& line, long& lineno) {
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    return true;
  }
  return false;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

SparseSymMatrix read_matrix_market(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  ++lineno;
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", lineno);
  if (lower(object) != "matrix" || lower(format) != "coordinate")
    throw ParseError("only coordinate matrices are supported", lineno);
  if (lower(field) != "real" && lower(field) != "integer") throw ParseError("only real matrices are supported", lineno);
  if (lower(symmetry) != "symmetric") throw ParseError("matrix is not flagged symmetric", lineno);

  if (!next_data_line(in, line, lineno)) throw ParseError("missing size line", lineno + 1);
  long rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz) || rows <= 0 || cols <= 0 || nnz < 0)
      throw ParseError("malformed size line", lineno);
    if (rows != cols) throw ParseError("symmetric matrix must be square", lineno);
  }
  std::vector<Triplet> t;
  t.reserve(nnz);
  for (long e = 0; e < nnz; ++e) {
    if (!next_data_line(in, line, lineno)) throw ParseError("expected " + std::to_string(nnz) + " entries", lineno + 1);
    std::istringstream ss(line);
    long i = 0, j = 0;
    double v = 0.0;
    std::string extra;
    if (!(ss >> i >> j >> v) || (ss >> extra)) throw ParseError("malformed entry", lineno);
    if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError("entry index out of range", lineno);
    if (j > i) throw ParseError("entry above the diagonal in symmetric file", lineno);
    t.push_back({i - 1, j - 1, v});
  }
  if (next_data_line(in, line, lineno)) throw ParseError("trailing data after entries", lineno);
  try {
    return SparseSymMatrix::from_triplets(rows, std::move(t), true);
  } catch (const StructuralError& err) {
    throw ParseError(err.what(), 0);
  }
}

void write_matrix_market(const SparseSymMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  Index lower_nnz = 0;
  const auto ro = a.row_offsets();
  const auto ci = a.col_indices();
  const auto va = a.values();
  for (Index i = 0; i < a.n(); ++i)
    for (Index p = ro[i]; p < ro[i + 1]; ++p)
      if (ci[p] <= i) ++lower_nnz;
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << a.n() << ' ' << a.n() << ' ' << lower_nnz << '\n';
  for (Index i = 0; i < a.n(); ++i)
    for (Index p = ro[i]; p < ro[i + 1]; ++p)
      if (ci[p] <= i) out << i + 1 << ' ' << ci[p] + 1 << ' ' << fmt(va[p]) << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

void write_matrix_market_vector(const Vector& x, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "%%MatrixMarket matrix array real general\n" << x.size() << " 1\n";
  for (Index i = 0; i < x.size(); ++i) out << fmt(x(i)) << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

Vector read_matrix_market_vector(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  ++lineno;
  std::istringstream hs(line);
  std::string banner, object, format;
  hs >> banner >> object >> format;
  if (banner != "%%MatrixMarket" || lower(format) != "array") throw ParseError("expected an array header", lineno);
  if (!next_data_line(in, line, lineno)) throw ParseError("missing size line", lineno + 1);
  long rows = 0, cols = 0;
  std::istringstream ss(line);
  if (!(ss >> rows >> cols) || rows < 0 || cols != 1) throw ParseError("expected a single column", lineno);
  Vector x(rows);
  for (long i = 0; i < rows; ++i) {
    if (!next_data_line(in, line, lineno)) throw ParseError("too few values", lineno + 1);
    std::istringstream vs(line);
    if (!(vs >> x(i))) throw ParseError("malformed value", lineno);
  }
  return x;
}

} // namespace lorasp
