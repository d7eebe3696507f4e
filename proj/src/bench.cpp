#include "lorasp/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "lorasp/error.hpp"
#include "lorasp/krylov.hpp"
#include "lorasp/matrix_market.hpp"

namespace lorasp {

const char* solver_name(SolverKind s) { return s == SolverKind::gmres ? "gmres" : "stationary"; }

SolverKind parse_solver(const std::string& s) {
  if (s == "gmres") return SolverKind::gmres;
  if (s == "stationary") return SolverKind::stationary;
  throw InvalidArgument("unknown solver '" + s + "'");
}

Matrix preserved_vectors(const Problem& p, SolverMode mode, const std::string& preserve_path) {
  switch (mode) {
  case SolverMode::lorasp: return Matrix(p.a.n(), 0);
  case SolverMode::gc_constant: return Matrix::Ones(p.a.n(), 1);
  case SolverMode::gc_eigenvector:
    return p.grid ? Matrix(smallest_eigenvector(*p.grid)) : Matrix(smallest_eigenvector(p.a));
  case SolverMode::gc_user: {
    if (preserve_path.empty()) throw InvalidArgument("gc-user needs a vector file to preserve");
    const Vector v = read_matrix_market_vector(preserve_path);
    if (v.size() != p.a.n()) throw DimensionMismatch("preserved vector has the wrong length");
    return Matrix(v);
  }
  }
  return Matrix(p.a.n(), 0);
}

SolverConfig make_solver_config(const Problem& p, double eps, SolverMode mode, const BenchOptions& opt) {
  SolverConfig cfg;
  cfg.eps = eps;
  cfg.eps_schedule = opt.eps_schedule;
  cfg.leaf_size = opt.leaf_size;
  cfg.mode = mode;
  cfg.predicate = opt.predicate.value_or(p.geom ? NeighborPredicate::geometric : NeighborPredicate::graph);
  cfg.max_levels = opt.max_levels;
  if (p.grid) cfg.h = p.grid->h();
  cfg.validate();
  return cfg;
}

ClusterHierarchy make_hierarchy(const Problem& p, const SolverConfig& cfg) {
  HierarchyOptions ho;
  ho.leaf_size = cfg.leaf_size;
  ho.predicate = cfg.predicate;
  return ClusterHierarchy::build(p.a, p.geom ? &*p.geom : nullptr, ho);
}

BenchRecord run_case(const BenchCase& c, const BenchOptions& opt) {
  using clock = std::chrono::steady_clock;
  const Problem p = make_problem(c.problem);
  const SolverConfig cfg = make_solver_config(p, c.eps, c.mode, opt);
  const Matrix phi = preserved_vectors(p, c.mode, opt.preserve_path);

  const auto t0 = clock::now();
  const ClusterHierarchy hier = make_hierarchy(p, cfg);
  const HFactorization h = factorize(p.a, hier, cfg, phi);
  const double factor_time = std::chrono::duration<double>(clock::now() - t0).count();

  const Vector x_star = random_solution(p.a.n(), opt.seed);
  const Vector b = p.a * x_star;
  const Operator pre = as_linear_operator(h);
  IterationReport rep;
  if (c.solver == SolverKind::gmres)
    rep = gmres_solve(p.a, b, pre, opt.tol.value_or(1e-10), opt.max_iter.value_or(300));
  else
    rep = stationary_solve(p.a, b, pre, opt.tol.value_or(1e-6), &x_star, opt.max_iter.value_or(1000));

  BenchRecord r;
  r.problem = p.label;
  r.n = p.a.n();
  r.tree_depth = hier.depth();
  r.eps = c.eps;
  r.eps_schedule = schedule_name(cfg.eps_schedule);
  r.mode = mode_name(c.mode);
  r.solver = solver_name(c.solver);
  r.iterations = rep.iterations;
  r.final_residual = rep.final_residual;
  r.factor_time_s = factor_time;
  r.solve_time_s = rep.wall_time;
  r.factor_entries = h.factor_entries();
  r.converged = rep.converged;
  r.diverged = rep.diverged;
  r.final_error = (rep.x - x_star).norm() / x_star.norm();
  return r;
}

std::vector<BenchRecord> run_bench(const std::vector<BenchCase>& cases, const BenchOptions& opt) {
  std::vector<BenchRecord> rows(cases.size());
  std::vector<std::exception_ptr> errors(cases.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      try {
        rows[i] = run_case(cases[i], opt);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(cases.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::stable_sort(rows.begin(), rows.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return std::tie(a.problem, a.n, a.eps, a.mode, a.solver) < std::tie(b.problem, b.n, b.eps, b.mode, b.solver);
  });
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

} // namespace

void write_csv(std::ostream& os, const std::vector<BenchRecord>& rows) {
  os << kCsvHeader << '\n';
  for (const BenchRecord& r : rows)
    os << csv_field(r.problem) << ',' << r.n << ',' << r.tree_depth << ',' << fmt("%g", r.eps) << ','
       << r.eps_schedule << ',' << r.mode << ',' << r.solver << ',' << r.iterations << ','
       << fmt("%.3e", r.final_residual) << ',' << fmt("%.3f", r.factor_time_s) << ','
       << fmt("%.3f", r.solve_time_s) << ',' << r.factor_entries << '\n';
}

std::string records_json(const std::vector<BenchRecord>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const BenchRecord& r : rows)
    arr.push_back({{"problem", r.problem},
                   {"n", r.n},
                   {"tree_depth", r.tree_depth},
                   {"eps", r.eps},
                   {"eps_schedule", r.eps_schedule},
                   {"mode", r.mode},
                   {"solver", r.solver},
                   {"iterations", r.iterations},
                   {"converged", r.converged},
                   {"diverged", r.diverged},
                   {"final_residual", r.final_residual},
                   {"final_error", r.final_error},
                   {"factor_time_s", r.factor_time_s},
                   {"solve_time_s", r.solve_time_s},
                   {"factor_entries", r.factor_entries}});
  return nlohmann::json{{"records", arr}}.dump(1);
}

std::vector<Index> parse_sweep(const std::string& s) {
  const auto eq = s.find('=');
  const auto dots = s.find("..");
  if (eq == std::string::npos || dots == std::string::npos || dots < eq || s.substr(0, eq) != "n")
    throw InvalidArgument("sweep must look like n=32..512");
  Index lo = 0, hi = 0;
  try {
    std::size_t used = 0;
    const std::string a = s.substr(eq + 1, dots - eq - 1);
    const std::string b = s.substr(dots + 2);
    lo = std::stoll(a, &used);
    if (used != a.size()) throw InvalidArgument("");
    hi = std::stoll(b, &used);
    if (used != b.size()) throw InvalidArgument("");
  } catch (const std::exception&) {
    throw InvalidArgument("sweep must look like n=32..512");
  }
  if (lo < 1 || hi < lo) throw InvalidArgument("sweep bounds must satisfy 1 <= lo <= hi");
  std::vector<Index> ks;
  for (Index k = lo; k <= hi; k *= 2) ks.push_back(k);
  return ks;
}

std::string with_grid_size(const std::string& spec, Index k) {
  if (spec.rfind("mm:", 0) == 0) throw InvalidArgument("a sweep needs a grid problem");
  std::istringstream in(spec);
  std::string part, out;
  bool replaced = false;
  while (std::getline(in, part, ':')) {
    if (part.rfind("k=", 0) == 0) {
      part = "k=" + std::to_string(k);
      replaced = true;
    }
    out += (out.empty() ? "" : ":") + part;
  }
  if (!replaced) out += ":k=" + std::to_string(k);
  return out;
}

} // namespace lorasp
