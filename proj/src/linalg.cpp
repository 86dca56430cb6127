#include "mmsie/linalg.hpp"

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>

namespace mmsie {

DenseLu::DenseLu(const CMatrix& a, double max_condition, const std::string& what) {
  if (a.rows() != a.cols()) throw DimensionError(what + " is not square");
  Eigen::PartialPivLU<CMatrix> lu(a);
  rcond_ = lu.rcond();
  if (!(rcond_ > 1.0 / max_condition)) {
    std::ostringstream msg;
    msg << what << " is numerically singular (condition estimate " << (rcond_ > 0 ? 1.0 / rcond_ : INFINITY) << ")";
    throw SingularMatrixError(msg.str());
  }
  lu_ = lu.matrixLU();
  // P A = L U; P maps row i of A to row p(i).
  Eigen::VectorXi p = lu.permutationP().indices();
  perm_.resize(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) perm_[p[i]] = static_cast<int>(i);
}

DenseLu::DenseLu(CMatrix lu, Eigen::VectorXi perm, double rcond) : lu_(std::move(lu)), perm_(std::move(perm)), rcond_(rcond) {
  if (lu_.rows() != lu_.cols() || perm_.size() != lu_.rows()) throw DimensionError("inconsistent LU factors");
}

CMatrix DenseLu::solve(const CMatrix& b) const {
  if (b.rows() != lu_.rows()) throw DimensionError("LU solve: dimension mismatch");
  CMatrix x(b.rows(), b.cols());
  for (Eigen::Index i = 0; i < b.rows(); ++i) x.row(i) = b.row(perm_[i]);
  lu_.triangularView<Eigen::UnitLower>().solveInPlace(x);
  lu_.triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

CVector DenseLu::solve(const CVector& b) const {
  CMatrix x = solve(CMatrix(b));
  return x.col(0);
}

void write_matrix(std::ostream& out, const CMatrix& m) {
  std::int64_t dims[2] = {m.rows(), m.cols()};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v[2] = {m(i, j).real(), m(i, j).imag()};
      out.write(reinterpret_cast<const char*>(v), sizeof(v));
    }
}

CMatrix read_matrix(std::istream& in) {
  std::int64_t dims[2];
  if (!in.read(reinterpret_cast<char*>(dims), sizeof(dims))) throw ParseError("truncated matrix header");
  if (dims[0] < 0 || dims[1] < 0 || dims[0] > (1 << 20) || dims[1] > (1 << 20)) throw ParseError("bad matrix dimensions");
  CMatrix m(dims[0], dims[1]);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double v[2];
      if (!in.read(reinterpret_cast<char*>(v), sizeof(v))) throw ParseError("truncated matrix data");
      m(i, j) = Complex(v[0], v[1]);
    }
  return m;
}

}  // namespace mmsie
