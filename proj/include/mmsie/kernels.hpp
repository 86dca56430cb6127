#pragma once

#include <array>
#include <vector>

#include "mmsie/basis.hpp"
#include "mmsie/quadrature.hpp"

namespace mmsie {

struct MediumParams {
  double frequency = 0.0;
  double omega = 0.0;
  double mu0 = kMu0;
  double eps0 = kEps0;
  double k0 = 0.0;

  static MediumParams at(double frequency_hz);
  double wavelength() const { return 2.0 * kPi / k0; }
};

struct QuadratureRule {
  int order = 6;               // points per triangle, regular pairs
  int near_order = 7;          // points per triangle, near pairs
  double near_threshold = 2.0; // centroid distance / triangle diameter
  int singular_order = 7;      // Gauss points per axis for touching pairs

  void validate() const;
  // One level finer in every setting (for convergence checks).
  QuadratureRule refined() const;
};

Complex green(const Vec3& r, const Vec3& r_src, double k0);
// Gradient with respect to r.
CVec3 green_gradient(const Vec3& r, const Vec3& r_src, double k0);

using TriCorners = std::array<Vec3, 3>;

// Closed-form static integrals over a flat triangle for observation point r.
struct StaticPotentials {
  double inv_r = 0.0;   // integral of 1/R
  Vec3 grad_inv_r;      // integral of grad_r (1/R); principal value in-plane
  Vec3 rho_over_r;      // integral of (rho' - rho)/R
};
StaticPotentials static_potentials(const TriCorners& tri, const Vec3& r);

enum class PairKind {
  kLCharge,  // integral of G
  kLSmooth,  // integral of G (r - P0).(r' - Q0)
  kK         // integral of (r - P0).(grad G x (r' - Q0)), principal value
};

// Pair integral over two triangles; adjacency is detected from exactly
// coincident corner coordinates.
Complex singular_pair_integral(const TriCorners& test, const TriCorners& src, PairKind kind, const MediumParams& medium,
                               const QuadratureRule& quad);

// Local integrals between triangle t of the test support mesh and s of the
// source support mesh. With P_i, Q_j the triangle corners:
//   L(i, j) = int int G (r - P_i).(r' - Q_j),  L0 = int int G
//   K(i, j) = int int (r - P_i).(grad G x (r' - Q_j))
class PairIntegrator {
 public:
  PairIntegrator(const TriangleMesh& test, const TriangleMesh& src, bool same_mesh, const MediumParams& medium,
                 const QuadratureRule& quad);

  void L(int t, int s, Eigen::Matrix3cd& local, Complex& local0) const;
  void K(int t, int s, Eigen::Matrix3cd& local) const;
  bool coplanar(int t, int s) const;

 private:
  struct TriData {
    TriCorners p;
    Vec3 centroid;
    Vec3 normal;
    double area;
    double diameter;
  };
  struct Points {
    std::vector<Vec3> r;
    std::vector<double> w;  // includes area
  };
  Adjacency classify(int t, int s, std::array<int, 3>& pt, std::array<int, 3>& ps) const;
  bool is_near(int t, int s) const;

  const TriangleMesh& test_;
  const TriangleMesh& src_;
  bool same_;
  double k_;
  QuadratureRule quad_;
  std::vector<TriData> tt_, ts_;
  std::vector<Points> test_far_, test_near_, src_far_, src_near_;
};

// Galerkin matrices over whole spaces. Same support mesh (pointer identity)
// enables touching-pair detection.
// Z[m, n] = j w mu0 int int G [f_m . f_n - (1/k^2) div f_m div f_n]
CMatrix assemble_L(const BasisSpace& test, const BasisSpace& src, const MediumParams& medium,
                   const QuadratureRule& quad);
// K[m, n] = <f_m, PV int grad G x f_n>; identity terms are left to the caller.
CMatrix assemble_K(const BasisSpace& test, const BasisSpace& src, const MediumParams& medium,
                   const QuadratureRule& quad);

// Entries of assemble_L for a sparse set of (test, source) index pairs.
std::vector<Complex> assemble_L_entries(const BasisSpace& test, const BasisSpace& src,
                                        const std::vector<std::pair<int, int>>& pairs, const MediumParams& medium,
                                        const QuadratureRule& quad);

}  // namespace mmsie
