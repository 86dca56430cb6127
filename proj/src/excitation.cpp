#include "mmsie/excitation.hpp"

#include <limits>

#include "mmsie/quadrature.hpp"

namespace mmsie {

namespace {

Vec3 mirror(const Vec3& r, double z0) { return Vec3(r.x(), r.y(), 2.0 * z0 - r.z()); }
CVec3 mirror_vector(const CVec3& v) { return CVec3(v.x(), v.y(), -v.z()); }

CVec3 plane_wave_field(const PlaneWave& p, const MediumParams& medium, const Vec3& r) {
  double phase = medium.k0 * p.direction.dot(r);
  return (p.amplitude * Complex(std::cos(phase), -std::sin(phase))) * p.polarization.cast<Complex>();
}

CVec3 free_field(const Excitation& exc, const MediumParams& medium, const Vec3& r) {
  if (const auto* p = std::get_if<PlaneWave>(&exc.source)) return plane_wave_field(*p, medium, r);
  if (const auto* d = std::get_if<HertzianDipole>(&exc.source)) return dipole_field(*d, medium, r);
  return CVec3::Zero();
}

}  // namespace

void Excitation::validate() const {
  if (const auto* p = std::get_if<PlaneWave>(&source)) {
    if (std::abs(p->direction.norm() - 1.0) > 1e-9) throw Error("plane wave direction must be a unit vector");
    if (std::abs(p->polarization.norm() - 1.0) > 1e-9) throw Error("plane wave polarization must be a unit vector");
    if (std::abs(p->polarization.dot(p->direction)) > 1e-12)
      throw Error("plane wave polarization must be orthogonal to the direction");
  }
  if (const auto* g = std::get_if<DeltaGap>(&source)) {
    if (g->edge < 0) throw Error("delta gap needs an edge");
    if (image_plane) throw Error("delta gap feeds over a ground plane are not supported");
  }
}

CVec3 dipole_field(const HertzianDipole& d, const MediumParams& medium, const Vec3& r) {
  Vec3 rv = r - d.position;
  double R = rv.norm();
  if (R < kDipoleExclusion) throw Error("field evaluated at the dipole position");
  Vec3 u = rv / R;
  const double k = medium.k0;
  const Complex jkr(0.0, k * R);
  const Complex a = 1.0 + 1.0 / jkr + 1.0 / (jkr * jkr);
  const Complex b = 1.0 + 3.0 / jkr + 3.0 / (jkr * jkr);
  const Complex g = Complex(std::cos(k * R), -std::sin(k * R)) / (4.0 * kPi * R);
  const Complex pref = Complex(0.0, -medium.omega * medium.mu0) * g;
  Complex up = u.cast<Complex>().dot(d.moment);
  return pref * (a * d.moment - b * up * u.cast<Complex>());
}

CVec3 incident_field(const Excitation& exc, const MediumParams& medium, const Vec3& r) {
  CVec3 e = free_field(exc, medium, r);
  if (exc.image_plane) {
    // Image field: E_img(r) = -M E(M r) with M the reflection in z.
    e -= mirror_vector(free_field(exc, medium, mirror(r, *exc.image_plane)));
  }
  return e;
}

CVector project_rhs(const Excitation& exc, const BasisSpace& space, const MediumParams& medium,
                    const QuadratureRule& quad) {
  CVector v = CVector::Zero(static_cast<Eigen::Index>(space.dof_count()));
  if (exc.is_delta_gap()) return v;
  const TriangleMesh& m = space.support_mesh();
  const auto& rule = triangle_rule_by_points(quad.order);
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const int ti = static_cast<int>(t);
    const auto& pieces = space.pieces(ti);
    if (pieces.empty()) continue;
    const Vec3 p[3] = {m.corner(ti, 0), m.corner(ti, 1), m.corner(ti, 2)};
    const double area = m.area(ti);
    for (const auto& q : rule) {
      Vec3 r = q.bary[0] * p[0] + q.bary[1] * p[1] + q.bary[2] * p[2];
      CVec3 e = incident_field(exc, medium, r) * (q.weight * area);
      for (const auto& pc : pieces) {
        Vec3 f = pc.c[0] * (r - p[0]) + pc.c[1] * (r - p[1]) + pc.c[2] * (r - p[2]);
        v[pc.function] += f.cast<Complex>().dot(e);
      }
    }
  }
  return v;
}

CVector delta_gap_vector(const BasisSpace& scatterer, int edge, Complex voltage) {
  if (scatterer.kind() != BasisKind::kRwg) throw Error("delta gap requires an RWG space");
  if (edge < 0 || edge >= static_cast<int>(scatterer.mesh().num_edges()))
    throw Error("delta gap edge " + std::to_string(edge) + " does not exist");
  int f = scatterer.function_of_edge(edge);
  if (f < 0) throw Error("delta gap edge " + std::to_string(edge) + " is a boundary edge");
  CVector v = CVector::Zero(static_cast<Eigen::Index>(scatterer.dof_count()));
  v[f] = voltage * scatterer.rwg()[f].edge_length;
  return v;
}

int nearest_interior_edge(const TriangleMesh& mesh, const Vec3& p) {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Edge& ed = mesh.edges()[e];
    if (!ed.interior()) continue;
    double d = (0.5 * (mesh.vertex(ed.v0) + mesh.vertex(ed.v1)) - p).norm();
    if (d < bd) {
      bd = d;
      best = static_cast<int>(e);
    }
  }
  if (best < 0) throw Error("mesh has no interior edge");
  return best;
}

}  // namespace mmsie
