#include "lorasp/krylov.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "lorasp/error.hpp"
#include "lorasp/kernels.hpp"

namespace lorasp {

namespace {

std::span<const double> cview(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<double> view(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

Vector random_solution(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x(i) = u(rng);
  return x;
}

IterationReport gmres_solve(const SparseSymMatrix& a, const Vector& b, const Operator& precond, double tol,
                            Index max_iter) {
  if (b.size() != a.n()) throw DimensionMismatch("gmres: right-hand side has the wrong length");
  const auto t0 = std::chrono::steady_clock::now();
  IterationReport rep;
  rep.preconditioning = "right";
  const Index n = a.n();
  rep.x = Vector::Zero(n);
  const double bnorm = kernels::nrm2(cview(b));
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.wall_time = seconds_since(t0);
    return rep;
  }

  std::vector<Vector> v{b / bnorm};
  std::vector<Vector> z; // preconditioned directions M^{-1} v_j
  Matrix hess = Matrix::Zero(max_iter + 1, max_iter);
  std::vector<double> cs, sn;
  Vector g = Vector::Zero(max_iter + 1);
  g(0) = bnorm;

  for (Index j = 0; j < max_iter; ++j) {
    z.push_back(precond ? precond(v[j]) : v[j]);
    Vector w = a * z[j];
    // Modified Gram-Schmidt, two passes.
    for (int pass = 0; pass < 2; ++pass)
      for (Index i = 0; i <= j; ++i) {
        const double hij = kernels::dot(cview(v[i]), cview(w));
        hess(i, j) += hij;
        kernels::axpy(-hij, cview(v[i]), view(w));
      }
    const double hnext = kernels::nrm2(cview(w));
    hess(j + 1, j) = hnext;

    // Apply previous rotations, then form a new one.
    for (Index i = 0; i < j; ++i) {
      const double t = cs[i] * hess(i, j) + sn[i] * hess(i + 1, j);
      hess(i + 1, j) = -sn[i] * hess(i, j) + cs[i] * hess(i + 1, j);
      hess(i, j) = t;
    }
    const double r = std::hypot(hess(j, j), hess(j + 1, j));
    cs.push_back(r == 0.0 ? 1.0 : hess(j, j) / r);
    sn.push_back(r == 0.0 ? 0.0 : hess(j + 1, j) / r);
    hess(j, j) = r;
    hess(j + 1, j) = 0.0;
    g(j + 1) = -sn[j] * g(j);
    g(j) = cs[j] * g(j);

    // Current iterate and its true residual.
    Vector y = g.head(j + 1);
    for (Index i = j; i >= 0; --i) {
      for (Index k = i + 1; k <= j; ++k) y(i) -= hess(i, k) * y(k);
      y(i) /= hess(i, i);
    }
    rep.x.setZero();
    for (Index i = 0; i <= j; ++i) kernels::axpy(y(i), cview(z[i]), view(rep.x));
    const double res = residual_norm(a, rep.x, b) / bnorm;
    rep.residual_history.push_back(res);
    rep.iterations = j + 1;
    rep.final_residual = res;
    if (res <= tol || !std::isfinite(res)) {
      rep.converged = res <= tol;
      break;
    }
    if (hnext == 0.0) break; // exact breakdown: the Krylov space is invariant
    Vector vn = w / hnext;
    v.push_back(std::move(vn));
  }
  rep.wall_time = seconds_since(t0);
  return rep;
}

IterationReport stationary_solve(const SparseSymMatrix& a, const Vector& b, const Operator& precond, double tol,
                                 const Vector* x_star, Index max_iter) {
  if (b.size() != a.n()) throw DimensionMismatch("stationary: right-hand side has the wrong length");
  if (x_star && x_star->size() != a.n()) throw DimensionMismatch("stationary: x* has the wrong length");
  const auto t0 = std::chrono::steady_clock::now();
  IterationReport rep;
  rep.preconditioning = "left";
  rep.x = Vector::Zero(a.n());
  const double bnorm = kernels::nrm2(cview(b));
  const double e0 = x_star ? kernels::nrm2(cview(*x_star)) : bnorm;
  if (e0 == 0.0) {
    rep.converged = true;
    rep.wall_time = seconds_since(t0);
    return rep;
  }
  Vector r = b;
  for (Index k = 0; k < max_iter; ++k) {
    const Vector dx = precond ? precond(r) : r;
    kernels::axpy(1.0, cview(dx), view(rep.x));
    r = b - a * rep.x;
    const double measure = x_star ? (rep.x - *x_star).norm() / e0 : kernels::nrm2(cview(r)) / bnorm;
    rep.residual_history.push_back(measure);
    rep.iterations = k + 1;
    if (measure <= tol) {
      rep.converged = true;
      break;
    }
    if (!std::isfinite(measure) || measure > 1e6) {
      rep.diverged = true;
      break;
    }
  }
  rep.final_residual = bnorm > 0.0 ? kernels::nrm2(cview(r)) / bnorm : 0.0;
  rep.wall_time = seconds_since(t0);
  return rep;
}

} // namespace lorasp
