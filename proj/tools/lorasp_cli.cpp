// Command-line driver: benchmarks, solves and dense diagnostics.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lorasp/bench.hpp"
#include "lorasp/diagnostics.hpp"
#include "lorasp/error.hpp"
#include "lorasp/krylov.hpp"
#include "lorasp/matrix_market.hpp"

using namespace lorasp;

namespace {

struct Args {
  std::vector<std::string> problems{"poisson2d:k=32"};
  std::vector<double> eps{0.1};
  std::string schedule = "const";
  Index leaf_size = 8;
  std::vector<std::string> modes{"lorasp"};
  std::vector<std::string> solvers{"gmres"};
  std::string predicate = "auto";
  double tol = 0.0;
  Index max_iter = 0;
  int max_levels = -1;
  std::uint64_t seed = 1;
  std::string out;
  std::string action = "bench";
  std::string sweep;
  std::string rhs = "random";
  std::string preserve;
  int jobs = 1;
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw ResourceError("cannot write " + path);
  f << text << '\n';
}

BenchOptions options(const Args& a) {
  BenchOptions o;
  o.eps_schedule = parse_schedule(a.schedule);
  o.leaf_size = a.leaf_size;
  if (a.predicate == "graph") o.predicate = NeighborPredicate::graph;
  else if (a.predicate == "geometric") o.predicate = NeighborPredicate::geometric;
  else if (a.predicate != "auto") throw InvalidArgument("unknown predicate '" + a.predicate + "'");
  if (a.tol > 0.0) o.tol = a.tol;
  if (a.max_iter > 0) o.max_iter = a.max_iter;
  o.max_levels = a.max_levels;
  o.seed = a.seed;
  o.preserve_path = a.preserve;
  o.jobs = a.jobs;
  return o;
}

std::vector<std::string> problem_list(const Args& a) {
  if (a.sweep.empty()) return a.problems;
  std::vector<std::string> out;
  for (Index k : parse_sweep(a.sweep))
    for (const std::string& p : a.problems) out.push_back(with_grid_size(p, k));
  return out;
}

int bench(const Args& a) {
  const BenchOptions opt = options(a);
  std::vector<BenchCase> cases;
  for (const std::string& p : problem_list(a))
    for (double e : a.eps)
      for (const std::string& m : a.modes)
        for (const std::string& s : a.solvers) cases.push_back({p, e, parse_mode(m), parse_solver(s)});
  const auto rows = run_bench(cases, opt);
  write_csv(std::cout, rows);
  if (!a.out.empty()) emit(records_json(rows), a.out);
  return 0;
}

int solve(const Args& a) {
  const BenchOptions opt = options(a);
  const Problem p = make_problem(problem_list(a).front());
  const SolverMode mode = parse_mode(a.modes.front());
  const SolverConfig cfg = make_solver_config(p, a.eps.front(), mode, opt);
  const HFactorization h = factorize(p.a, make_hierarchy(p, cfg), cfg, preserved_vectors(p, mode, a.preserve));

  Vector b;
  if (a.rhs == "ones") b = Vector::Ones(p.a.n());
  else if (a.rhs == "random") b = p.a * random_solution(p.a.n(), a.seed);
  else b = read_matrix_market_vector(a.rhs);
  if (b.size() != p.a.n()) throw DimensionMismatch("right-hand side has the wrong length");

  const SolverKind kind = parse_solver(a.solvers.front());
  const IterationReport rep =
      kind == SolverKind::gmres
          ? gmres_solve(p.a, b, as_linear_operator(h), opt.tol.value_or(1e-10), opt.max_iter.value_or(300))
          : stationary_solve(p.a, b, as_linear_operator(h), opt.tol.value_or(1e-6), nullptr,
                             opt.max_iter.value_or(1000));
  if (!a.out.empty()) write_matrix_market_vector(rep.x, a.out);
  std::printf("n %lld iterations %lld converged %s residual %.6e true_residual %.6e\n",
              static_cast<long long>(p.a.n()), static_cast<long long>(rep.iterations),
              rep.converged ? "true" : "false", rep.final_residual, residual_norm(p.a, b, rep.x) / b.norm());
  return 0;
}

int diag(const Args& a) {
  const BenchOptions opt = options(a);
  nlohmann::json out = nlohmann::json::array();
  for (const std::string& spec : problem_list(a)) {
    const Problem p = make_problem(spec);
    if (p.a.n() > kDenseLimit)
      throw Unsupported("diag refuses n = " + std::to_string(p.a.n()) + " (limit " + std::to_string(kDenseLimit) +
                        ")");
    const Matrix ad = p.a.to_dense();
    for (double e : a.eps)
      for (const std::string& ms : a.modes) {
        const SolverMode mode = parse_mode(ms);
        const SolverConfig cfg = make_solver_config(p, e, mode, opt);
        const Matrix phi = preserved_vectors(p, mode, a.preserve);
        const HFactorization h = factorize(p.a, make_hierarchy(p, cfg), cfg, phi);
        const Matrix hinv = materialize_solve_operator(h);
        const Matrix ah = recover_a_h(hinv);
        const FactorizationError fe = factorization_error(ah, ad);
        const ConditionReport cr = preconditioned_condition_number(hinv, ad);
        const Matrix split = phi.cols() > 0 ? phi : Matrix(Matrix::Ones(p.a.n(), 1));
        const ConvergenceReport conv = convergence_report(ad, ah, split);
        nlohmann::json row{{"problem", p.label},
                           {"n", p.a.n()},
                           {"eps", e},
                           {"eps_schedule", schedule_name(cfg.eps_schedule)},
                           {"mode", mode_name(mode)},
                           {"error_fro", fe.abs_fro},
                           {"rel_error_fro", fe.rel_fro},
                           {"kappa", cr.indefinite ? nlohmann::json(nullptr) : nlohmann::json(cr.kappa)},
                           {"lambda_min", cr.lambda_min},
                           {"lambda_max", cr.lambda_max},
                           {"indefinite", cr.indefinite},
                           {"convergence", nlohmann::json::parse(conv.to_json())}};
        if (phi.cols() > 0) {
          double worst = 0.0;
          for (Index c = 0; c < phi.cols(); ++c)
            worst = std::max(worst, preservation_residual(h, p.a, phi.col(c)));
          row["preservation_residual"] = worst;
        }
        out.push_back(row);
      }
  }
  emit(out.dump(1), a.out);
  return 0;
}

int factor_stats(const Args& a) {
  const BenchOptions opt = options(a);
  nlohmann::json out = nlohmann::json::array();
  for (const std::string& spec : problem_list(a)) {
    const Problem p = make_problem(spec);
    for (double e : a.eps)
      for (const std::string& ms : a.modes) {
        const SolverMode mode = parse_mode(ms);
        const SolverConfig cfg = make_solver_config(p, e, mode, opt);
        const HFactorization h = factorize(p.a, make_hierarchy(p, cfg), cfg, preserved_vectors(p, mode, a.preserve));
        nlohmann::json row = nlohmann::json::parse(h.stats_json());
        row["problem"] = p.label;
        out.push_back(row);
      }
  }
  emit(out.dump(1), a.out);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical sparse solver with low-rank compression"};
  Args a;
  app.add_option("--problem", a.problems, "poisson{1,2,3}d:k=K[:coeff=constant|piecewise|random][:seed=S] or mm:path")
      ->delimiter(',');
  app.add_option("--eps", a.eps, "compression tolerances")->delimiter(',');
  app.add_option("--eps-schedule", a.schedule, "const, leaf or root")
      ->check(CLI::IsMember({"const", "leaf", "root"}));
  app.add_option("--leaf-size", a.leaf_size, "leaf cluster size")->check(CLI::PositiveNumber);
  app.add_option("--mode", a.modes, "lorasp, gc-constant, gc-eigenvector, gc-user")
      ->delimiter(',')
      ->check(CLI::IsMember({"lorasp", "gc-constant", "gc-eigenvector", "gc-user"}));
  app.add_option("--solver", a.solvers, "gmres or stationary")
      ->delimiter(',')
      ->check(CLI::IsMember({"gmres", "stationary"}));
  app.add_option("--predicate", a.predicate, "neighbor predicate: auto, graph or geometric")
      ->check(CLI::IsMember({"auto", "graph", "geometric"}));
  app.add_option("--tol", a.tol, "stopping tolerance (default 1e-10 gmres, 1e-6 stationary)");
  app.add_option("--max-iter", a.max_iter, "iteration cap (default 300 gmres, 1000 stationary)");
  app.add_option("--max-levels", a.max_levels, "compressed levels before the dense root (-1: all)");
  app.add_option("--seed", a.seed, "seed of the random solution");
  app.add_option("--out", a.out, "JSON report (bench, diag, factor-stats) or solution file (solve)");
  app.add_option("--action", a.action, "bench, solve, diag or factor-stats")
      ->check(CLI::IsMember({"bench", "solve", "diag", "factor-stats"}));
  app.add_option("--sweep", a.sweep, "grid sizes, e.g. n=32..512 (k doubling)");
  app.add_option("--rhs", a.rhs, "ones, random or a MatrixMarket vector file (solve)");
  app.add_option("--preserve", a.preserve, "MatrixMarket vector kept exactly by gc-user");
  app.add_option("--jobs", a.jobs, "worker threads for bench")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (a.action == "bench") return bench(a);
    if (a.action == "solve") return solve(a);
    if (a.action == "diag") return diag(a);
    return factor_stats(a);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Unsupported& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
