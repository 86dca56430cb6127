#pragma once

#include <iosfwd>

#include "mmsie/types.hpp"

namespace mmsie {

// LU with partial pivoting whose factors can be stored and reloaded.
class DenseLu {
 public:
  DenseLu() = default;
  // Throws SingularMatrixError when the reciprocal condition estimate is
  // below 1 / max_condition.
  explicit DenseLu(const CMatrix& a, double max_condition = 1e12, const std::string& what = "matrix");
  DenseLu(CMatrix lu, Eigen::VectorXi perm, double rcond);

  Eigen::Index rows() const { return lu_.rows(); }
  double rcond() const { return rcond_; }
  const CMatrix& factors() const { return lu_; }
  const Eigen::VectorXi& permutation() const { return perm_; }

  CMatrix solve(const CMatrix& b) const;
  CVector solve(const CVector& b) const;

 private:
  CMatrix lu_;
  Eigen::VectorXi perm_;  // row i of P A is row perm_[i] of A
  double rcond_ = 0.0;
};

void write_matrix(std::ostream& out, const CMatrix& m);
CMatrix read_matrix(std::istream& in);

}  // namespace mmsie
