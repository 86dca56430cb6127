#pragma once

#include <array>
#include <atomic>
#include <memory>
#include <vector>

#include "mmsie/system.hpp"

namespace mmsie {

struct AimParams {
  int order = 3;            // N_O: stencils have order + 1 points per axis
  int near_stencils = 4;    // N_NF
  double spacing_m = 0.0;   // 0 selects a tenth of a wavelength
  int projection_points = 6;

  void validate() const;
};

struct AimGrid {
  Vec3 origin = Vec3::Zero();
  double spacing = 0.0;
  Eigen::Vector3i counts = Eigen::Vector3i::Zero();
  int order = 3;
  int near_stencils = 4;

  Eigen::Index size() const { return Eigen::Index(counts[0]) * counts[1] * counts[2]; }
  Eigen::Index index(int i, int j, int k) const { return (Eigen::Index(i) * counts[1] + j) * counts[2] + k; }
  Vec3 point(int i, int j, int k) const { return origin + spacing * Vec3(i, j, k); }
  // Stencil blocks per axis (order grid intervals each).
  Eigen::Vector3i stencils() const;
  // First grid index of the stencil of a source centred at p.
  Eigen::Vector3i stencil_base(const Vec3& p) const;
};

// Grid centred on the box [lo, hi] with a margin of one stencil on every side.
AimGrid build_grid(const Vec3& lo, const Vec3& hi, const AimParams& params, const MediumParams& medium);

// Projection onto grid sources for psi = A_x, A_y, A_z and the charge. Column n
// holds the weights of function n; weights are tensor Lagrange polynomials, so
// every moment x^a y^b z^c with a, b, c <= order is reproduced.
struct AimProjection {
  std::array<RSparse, 4> p;
  std::vector<Eigen::Vector3i> base;  // stencil base of each function
};
AimProjection build_projection(const AimGrid& grid, const BasisSpace& space, int quad_points);

// Z = j w mu [sum_xyz P^T H P - P_q^T H P_q / k^2] on the grid, plus a sparse
// precorrected near part that makes near pairs exact.
class AimOperator : public LinearOperator {
 public:
  // group[n] identifies the element of function n; pairs in one group are
  // always treated as near. An empty group vector puts every function alone.
  AimOperator(const BasisSpace& space, const MediumParams& medium, const QuadratureRule& quad,
              const AimParams& params, std::vector<int> group = {});
  ~AimOperator() override;
  AimOperator(const AimOperator&) = delete;
  AimOperator& operator=(const AimOperator&) = delete;

  Eigen::Index size() const override { return n_; }
  CVector apply(const CVector& x) const override;
  CVector apply_far(const CVector& x) const;

  const AimGrid& grid() const { return grid_; }
  const AimProjection& projection() const { return proj_; }
  const Eigen::SparseMatrix<Complex, Eigen::RowMajor>& near_corrected() const { return near_; }
  bool is_near(int m, int n) const;
  // Grid-propagated approximation of entry (m, n).
  Complex grid_entry(int m, int n) const;
  int kernel_builds() const { return kernel_builds_; }
  std::size_t storage_bytes() const;
  double build_seconds() const { return build_seconds_; }

 private:
  struct Fft;
  Complex kernel_sample(const Eigen::Vector3i& offset) const;
  void build_kernel();

  Eigen::Index n_ = 0;
  MediumParams medium_;
  AimGrid grid_;
  AimProjection proj_;
  std::vector<int> group_;
  Eigen::Vector3i padded_ = Eigen::Vector3i::Zero();
  std::vector<Complex> kernel_;      // samples on the padded grid (wrapped offsets)
  std::vector<Complex> kernel_fft_;
  std::unique_ptr<Fft> fft_;
  Eigen::SparseMatrix<Complex, Eigen::RowMajor> near_;
  int kernel_builds_ = 0;
  double build_seconds_ = 0.0;
};

CouplingFactory aim_coupling(const MediumParams& medium, const QuadratureRule& quad, const AimParams& params);

}  // namespace mmsie
