#include "lorasp/problems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "lorasp/error.hpp"
#include "lorasp/matrix_market.hpp"

namespace lorasp {

Index GridSpec::n() const {
  Index n = 1;
  for (int a = 0; a < dim; ++a) n *= k;
  return n;
}

namespace {

void check_grid(const GridSpec& g) {
  if (g.dim < 1 || g.dim > 3) throw InvalidArgument("grid dimension must be 1, 2 or 3");
  if (g.k < 2) throw InvalidArgument("grid needs k >= 2");
  if (g.coeff == Coefficient::constant && !(g.alpha > 0.0)) throw InvalidArgument("alpha must be positive");
}

// Edge p along an axis joins points p-1 and p of a grid line; p = 0 and p = k
// are the edges to the Dirichlet boundary.
class EdgeCoefficients {
public:
  explicit EdgeCoefficients(const GridSpec& g) : g_(g), lines_(g.n() / g.k) {
    if (g.coeff == Coefficient::random) {
      std::mt19937_64 rng(g.seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int a = 0; a < g.dim; ++a) {
        values_[a].resize(lines_ * (g.k + 1));
        for (double& v : values_[a]) v = u(rng);
      }
    }
  }

  // coords: integer grid coordinates of the line (entry `axis` ignored).
  double operator()(int axis, const std::array<Index, 3>& coords, Index p) const {
    switch (g_.coeff) {
    case Coefficient::constant: return g_.alpha;
    case Coefficient::random: return values_[axis][line_id(axis, coords) * (g_.k + 1) + p];
    case Coefficient::piecewise: {
      const double h = g_.h();
      bool inside = true;
      for (int a = 0; a < g_.dim; ++a) {
        const double x = a == axis ? (static_cast<double>(p) + 0.5) * h : static_cast<double>(coords[a] + 1) * h;
        inside = inside && x >= 0.25 && x <= 0.75;
      }
      return inside ? 1e-5 : 1.0;
    }
    }
    return 1.0;
  }

private:
  Index line_id(int axis, const std::array<Index, 3>& c) const {
    Index id = 0;
    for (int a = g_.dim - 1; a >= 0; --a)
      if (a != axis) id = id * g_.k + c[a];
    return id;
  }

  const GridSpec& g_;
  Index lines_;
  std::array<std::vector<double>, 3> values_;
};

} // namespace

PoissonProblem poisson_matrix(const GridSpec& g) {
  check_grid(g);
  const Index n = g.n();
  const Index k = g.k;
  const EdgeCoefficients coef(g);
  std::array<Index, 3> stride{1, k, k * k};

  std::vector<Triplet> t;
  t.reserve(n * (g.dim + 1));
  PoissonProblem out;
  out.geom.dim = g.dim;
  out.geom.coords.resize(n * g.dim);
  for (Index idx = 0; idx < n; ++idx) {
    std::array<Index, 3> c{0, 0, 0};
    for (int a = 0; a < g.dim; ++a) c[a] = idx / stride[a] % k;
    double diag = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      out.geom.coords[idx * g.dim + a] = static_cast<double>(c[a] + 1) * g.h();
      const double lo = coef(a, c, c[a]);
      const double hi = coef(a, c, c[a] + 1);
      diag += lo + hi;
      if (c[a] > 0) t.push_back({idx, idx - stride[a], -lo});
    }
    t.push_back({idx, idx, diag});
  }
  out.a = SparseSymMatrix::from_triplets(n, std::move(t), true);
  return out;
}

std::vector<double> analytic_eigenvalues(const GridSpec& g) {
  check_grid(g);
  if (g.coeff != Coefficient::constant) throw Unsupported("analytic eigenvalues need constant coefficients");
  std::vector<double> one(g.k);
  for (Index i = 0; i < g.k; ++i)
    one[i] = g.alpha * (2.0 - 2.0 * std::cos(static_cast<double>(i + 1) * std::numbers::pi * g.h()));
  std::vector<double> all{0.0};
  for (int a = 0; a < g.dim; ++a) {
    std::vector<double> next;
    next.reserve(all.size() * one.size());
    for (double x : all)
      for (double y : one) next.push_back(x + y);
    all = std::move(next);
  }
  std::sort(all.begin(), all.end());
  return all;
}

Vector smallest_eigenvector(const SparseSymMatrix& a) {
  if (a.n() > kDenseLimit)
    throw Unsupported("dense eigensolve limited to n <= " + std::to_string(kDenseLimit));
  Eigen::SelfAdjointEigenSolver<Matrix> es(a.to_dense());
  Vector v = es.eigenvectors().col(0);
  if (v.sum() < 0.0) v = -v;
  return v / v.norm();
}

Vector smallest_eigenvector(const GridSpec& g) {
  if (g.coeff != Coefficient::constant) return smallest_eigenvector(poisson_matrix(g).a);
  check_grid(g);
  const Index n = g.n();
  Vector v(n);
  std::array<Index, 3> stride{1, g.k, g.k * g.k};
  for (Index idx = 0; idx < n; ++idx) {
    double p = 1.0;
    for (int a = 0; a < g.dim; ++a)
      p *= std::sin(std::numbers::pi * static_cast<double>(idx / stride[a] % g.k + 1) * g.h());
    v(idx) = p;
  }
  return v / v.norm();
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

template <class T> T parse_number(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  T x{};
  in >> x;
  if (!in || !in.eof()) throw InvalidArgument("bad value for " + key + ": '" + v + "'");
  return x;
}

} // namespace

GridSpec parse_grid_spec(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.empty()) throw InvalidArgument("empty problem spec");
  GridSpec g;
  if (parts[0] == "poisson1d") g.dim = 1;
  else if (parts[0] == "poisson2d") g.dim = 2;
  else if (parts[0] == "poisson3d") g.dim = 3;
  else throw InvalidArgument("unknown problem kind '" + parts[0] + "'");
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto eq = parts[i].find('=');
    if (eq == std::string::npos) throw InvalidArgument("expected key=value in '" + parts[i] + "'");
    const std::string key = parts[i].substr(0, eq);
    const std::string val = parts[i].substr(eq + 1);
    if (key == "k") g.k = parse_number<Index>(key, val);
    else if (key == "alpha") g.alpha = parse_number<double>(key, val);
    else if (key == "seed") g.seed = parse_number<std::uint64_t>(key, val);
    else if (key == "coeff") {
      if (val == "constant") g.coeff = Coefficient::constant;
      else if (val == "piecewise") g.coeff = Coefficient::piecewise;
      else if (val == "random") g.coeff = Coefficient::random;
      else throw InvalidArgument("unknown coefficient '" + val + "'");
    } else {
      throw InvalidArgument("unknown problem field '" + key + "'");
    }
  }
  check_grid(g);
  return g;
}

std::string format_grid_spec(const GridSpec& g) {
  std::ostringstream out;
  out << "poisson" << g.dim << "d:k=" << g.k;
  switch (g.coeff) {
  case Coefficient::constant:
    if (g.alpha != 1.0) out << ":alpha=" << g.alpha;
    break;
  case Coefficient::piecewise: out << ":coeff=piecewise"; break;
  case Coefficient::random: out << ":coeff=random:seed=" << g.seed; break;
  }
  return out.str();
}

Problem make_problem(const std::string& spec) {
  Problem p;
  p.spec = spec;
  if (spec.rfind("mm:", 0) == 0) {
    p.label = spec;
    p.a = read_matrix_market(spec.substr(3));
    return p;
  }
  const GridSpec g = parse_grid_spec(spec);
  std::string label;
  for (const std::string& part : split(spec, ':')) {
    if (part.rfind("k=", 0) == 0) continue;
    label += (label.empty() ? "" : ":") + part;
  }
  p.label = label;
  PoissonProblem pp = poisson_matrix(g);
  p.a = std::move(pp.a);
  p.geom = std::move(pp.geom);
  p.grid = g;
  return p;
}

} // namespace lorasp
