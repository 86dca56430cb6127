#pragma once

#include <functional>
#include <vector>

#include "mmsie/system.hpp"

namespace mmsie {

enum class PreconditionerKind { kNone, kBlockJacobi };

struct SolveOptions {
  double rel_tol = 1e-6;
  int max_iters = 1000;
  int restart = 200;
  PreconditionerKind preconditioner = PreconditionerKind::kNone;

  void validate() const;
};

struct SolveResult {
  CVector solution;
  int iterations = 0;
  double final_residual = 0.0;  // absolute, ||b - A x||
  bool converged = false;
  bool stagnated = false;
  // Relative residual after each iteration; entry 0 is the start (1.0).
  std::vector<double> history;
  // Iteration index at which each restart cycle began.
  std::vector<int> cycle_starts;
};

using VectorMap = std::function<CVector(const CVector&)>;

// Restarted GMRES with right preconditioning, zero start vector and modified
// Gram-Schmidt with one reorthogonalization pass. The residual tracked is the
// true (unpreconditioned) residual.
SolveResult gmres(const LinearOperator& op, const CVector& rhs, const SolveOptions& opts,
                  const VectorMap& preconditioner = nullptr);
SolveResult gmres(const VectorMap& op, const CVector& rhs, const SolveOptions& opts,
                  const VectorMap& preconditioner = nullptr);

struct ConditionEstimate {
  double value = 0.0;
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  bool exact = false;
  bool converged = false;
};

// Exact SVD of the assembled operator when size <= exact_limit, otherwise
// extreme singular values of the Arnoldi Hessenberg matrix.
ConditionEstimate estimate_condition(const LinearOperator& op, int n_probes = 150, Eigen::Index exact_limit = 2000);

CMatrix to_dense(const LinearOperator& op);

}  // namespace mmsie
