#pragma once

#include <optional>
#include <variant>

#include "mmsie/basis.hpp"
#include "mmsie/kernels.hpp"

namespace mmsie {

struct PlaneWave {
  Vec3 direction{0, 0, -1};     // unit propagation direction
  Vec3 polarization{1, 0, 0};   // unit, orthogonal to direction
  Complex amplitude{1.0, 0.0};  // V/m at the origin
};

struct HertzianDipole {
  Vec3 position = Vec3::Zero();
  CVec3 moment{1.0, 0.0, 0.0};  // A m
};

// Voltage source across one scatterer edge of one element.
struct DeltaGap {
  int element = 0;
  int edge = -1;  // edge index on the element's scatterer mesh
  Complex voltage{1.0, 0.0};
};

struct Excitation {
  std::variant<PlaneWave, HertzianDipole, DeltaGap> source = PlaneWave{};
  // PEC ground plane z = image_plane; field sources are mirrored, scatterers
  // are mirrored by the problem set-up.
  std::optional<double> image_plane;

  bool is_delta_gap() const { return std::holds_alternative<DeltaGap>(source); }
  bool is_plane_wave() const { return std::holds_alternative<PlaneWave>(source); }
  void validate() const;
};

// Closest allowed distance between an evaluation point and a dipole.
inline constexpr double kDipoleExclusion = 1e-6;

// Free-space field of the source (plus its image when a ground plane is set).
// Delta gaps have no distributed field and return zero.
CVec3 incident_field(const Excitation& exc, const MediumParams& medium, const Vec3& r);
CVec3 dipole_field(const HertzianDipole& d, const MediumParams& medium, const Vec3& r);

// <f_n, E_inc> for every function of the space.
CVector project_rhs(const Excitation& exc, const BasisSpace& space, const MediumParams& medium,
                    const QuadratureRule& quad);

// <f_n, E_gap>: V times the edge length on the fed function, zero elsewhere.
CVector delta_gap_vector(const BasisSpace& scatterer, int edge, Complex voltage);
// Interior edge of the mesh whose midpoint is nearest to p.
int nearest_interior_edge(const TriangleMesh& mesh, const Vec3& p);

}  // namespace mmsie
