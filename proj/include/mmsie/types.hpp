#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace mmsie {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec3 = Eigen::Vector3cd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RSparse = Eigen::SparseMatrix<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kC0 = 299792458.0;
inline constexpr double kMu0 = 1.25663706212e-6;
inline constexpr double kEps0 = 1.0 / (kMu0 * kC0 * kC0);
inline constexpr double kEta0 = kMu0 * kC0;
inline constexpr Complex kJ{0.0, 1.0};

inline double wavenumber(double frequency_hz) { return 2.0 * kPi * frequency_hz / kC0; }
inline double wavelength(double frequency_hz) { return kC0 / frequency_hz; }

// Eigen's cross() conjugates for complex scalars; this one does not.
inline CVec3 cross(const CVec3& a, const CVec3& b) {
  return CVec3(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}
// Bilinear dot product (dot() conjugates its left operand).
inline Complex bdot(const CVec3& a, const CVec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed mesh file or configuration.
class ParseError : public Error {
 public:
  using Error::Error;
};

class TopologyError : public Error {
 public:
  using Error::Error;
};

// Invalid geometric arrangement (overlap, containment, degenerate facets).
class GeometryError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmsie
