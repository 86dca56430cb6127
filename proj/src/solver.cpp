#include "mmsie/solver.hpp"

#include <cmath>
#include <limits>

namespace mmsie {

void SolveOptions::validate() const {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw Error("solver tolerance must lie in (0, 1)");
  if (max_iters < 1) throw Error("solver max_iters must be positive");
  if (restart < 1 || restart > max_iters) throw Error("solver restart must lie in [1, max_iters]");
}

SolveResult gmres(const LinearOperator& op, const CVector& rhs, const SolveOptions& opts,
                  const VectorMap& preconditioner) {
  if (rhs.size() != op.size()) throw DimensionError("gmres: right-hand side length does not match the operator");
  return gmres([&op](const CVector& x) { return op.apply(x); }, rhs, opts, preconditioner);
}

SolveResult gmres(const VectorMap& op, const CVector& rhs, const SolveOptions& opts,
                  const VectorMap& preconditioner) {
  opts.validate();
  const Eigen::Index n = rhs.size();
  SolveResult res;
  res.solution = CVector::Zero(n);
  const double bnorm = rhs.norm();
  res.history.push_back(1.0);
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  const double target = opts.rel_tol * bnorm;
  auto precond = [&](const CVector& v) { return preconditioner ? preconditioner(v) : v; };

  CVector r = rhs;
  double beta = bnorm;
  const int m = opts.restart;
  while (res.iterations < opts.max_iters) {
    res.cycle_starts.push_back(res.iterations);
    const double cycle_start = beta;
    std::vector<CVector> v;
    v.reserve(m + 1);
    v.push_back(r / beta);
    CMatrix h = CMatrix::Zero(m + 1, m);
    std::vector<Complex> cs(m), sn(m);
    CVector g = CVector::Zero(m + 1);
    g[0] = beta;
    int j = 0;
    bool breakdown = false;
    for (; j < m && res.iterations < opts.max_iters; ++j) {
      CVector w = op(precond(v[j]));
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          Complex hij = v[i].dot(w);
          h(i, j) += hij;
          w -= hij * v[i];
        }
      double hn = w.norm();
      h(j + 1, j) = hn;
      for (int i = 0; i < j; ++i) {
        Complex t = std::conj(cs[i]) * h(i, j) + std::conj(sn[i]) * h(i + 1, j);
        h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = t;
      }
      double denom = std::hypot(std::abs(h(j, j)), hn);
      if (denom == 0.0) {
        cs[j] = 1.0;
        sn[j] = 0.0;
      } else {
        cs[j] = h(j, j) / denom;
        sn[j] = hn / denom;
      }
      h(j, j) = denom;
      h(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = std::conj(cs[j]) * g[j];
      ++res.iterations;
      res.history.push_back(std::abs(g[j + 1]) / bnorm);
      if (std::abs(g[j + 1]) <= target) {
        ++j;
        break;
      }
      if (hn <= 1e-14 * denom) {
        breakdown = true;
        ++j;
        break;
      }
      v.push_back(w / hn);
    }
    // A zero diagonal means the new direction was mapped into the existing
    // Krylov space (singular operator); it adds nothing to the least squares.
    while (j > 0 && h(j - 1, j - 1) == Complex(0.0)) --j;
    CVector y = h.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    CVector update = CVector::Zero(n);
    for (int i = 0; i < j; ++i) update += y[i] * v[i];
    res.solution += precond(update);
    r = rhs - op(res.solution);
    beta = r.norm();
    res.final_residual = beta;
    if (beta <= target) {
      res.converged = true;
      break;
    }
    if (breakdown || beta > (1.0 - 1e-12) * cycle_start) {
      res.stagnated = true;
      break;
    }
  }
  if (res.iterations == 0) res.final_residual = beta;
  return res;
}

CMatrix to_dense(const LinearOperator& op) {
  const Eigen::Index n = op.size();
  CMatrix a(n, n);
  for (Eigen::Index c = 0; c < n; ++c) a.col(c) = op.apply(CVector::Unit(n, c));
  return a;
}

namespace {

ConditionEstimate from_singular_values(const Eigen::VectorXd& s) {
  ConditionEstimate e;
  e.sigma_max = s.maxCoeff();
  e.sigma_min = s.minCoeff();
  e.value = e.sigma_min > 0.0 ? e.sigma_max / e.sigma_min : std::numeric_limits<double>::infinity();
  return e;
}

}  // namespace

ConditionEstimate estimate_condition(const LinearOperator& op, int n_probes, Eigen::Index exact_limit) {
  const Eigen::Index n = op.size();
  if (n == 0) throw DimensionError("condition estimate of an empty operator");
  if (n <= exact_limit) {
    Eigen::BDCSVD<CMatrix> svd(to_dense(op));
    ConditionEstimate e = from_singular_values(svd.singularValues());
    e.exact = true;
    e.converged = true;
    return e;
  }
  // Arnoldi from a fixed start vector; singular values of the (m+1) x m
  // Hessenberg matrix bracket the extreme singular values of the operator.
  const int m = static_cast<int>(std::min<Eigen::Index>(n_probes, n));
  std::vector<CVector> v;
  CVector start(n);
  for (Eigen::Index i = 0; i < n; ++i) start[i] = Complex(std::cos(0.7 * i + 0.3), std::sin(1.3 * i));
  v.push_back(start.normalized());
  CMatrix h = CMatrix::Zero(m + 1, m);
  ConditionEstimate prev, cur;
  int steps = 0;
  for (int j = 0; j < m; ++j) {
    CVector w = op.apply(v[j]);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) {
        Complex hij = v[i].dot(w);
        h(i, j) += hij;
        w -= hij * v[i];
      }
    double hn = w.norm();
    h(j + 1, j) = hn;
    steps = j + 1;
    if (hn < 1e-14) break;
    v.push_back(w / hn);
    if (steps % 10 == 0) {
      prev = cur;
      Eigen::JacobiSVD<CMatrix> svd(h.topLeftCorner(steps + 1, steps));
      cur = from_singular_values(svd.singularValues());
      if (prev.value > 0.0 && std::abs(cur.value - prev.value) <= 0.01 * cur.value) {
        cur.converged = true;
        return cur;
      }
    }
  }
  Eigen::JacobiSVD<CMatrix> svd(h.topLeftCorner(steps + 1, steps));
  cur = from_singular_values(svd.singularValues());
  cur.converged = steps < m;
  return cur;
}

}  // namespace mmsie
