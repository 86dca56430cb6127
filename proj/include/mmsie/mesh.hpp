#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mmsie/types.hpp"

namespace mmsie {

using Triangle = std::array<int, 3>;

struct Edge {
  int v0 = -1;  // v0 < v1
  int v1 = -1;
  std::array<int, 2> tris{-1, -1};  // ascending; tris[1] == -1 on the boundary
  bool interior() const { return tris[1] >= 0; }
};

// Provenance of a micro-triangle produced by barycentric_refine. The
// micro-triangle has vertices (coarse vertex, edge midpoint, barycenter)
// in some rotation that preserves the parent winding.
struct RefineInfo {
  int parent_triangle = -1;
  int parent_vertex = -1;
  int parent_edge = -1;
};

class TriangleMesh {
 public:
  TriangleMesh() = default;
  // Validates, builds edge topology and makes orientation consistent. Closed
  // meshes are oriented with outward normals (positive signed volume).
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool closed() const { return closed_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_interior_edges() const;
  std::size_t num_boundary_edges() const { return edges_.size() - num_interior_edges(); }

  const Vec3& vertex(int i) const { return vertices_[i]; }
  Vec3 corner(int t, int k) const { return vertices_[triangles_[t][k]]; }
  double area(int t) const { return areas_[t]; }
  const Vec3& normal(int t) const { return normals_[t]; }
  Vec3 centroid(int t) const;
  double diameter(int t) const;
  // Edge opposite local vertex k of triangle t.
  int triangle_edge(int t, int k) const { return tri_edges_[t][k]; }
  int find_edge(int a, int b) const;

  double total_area() const;
  double signed_volume() const;
  double max_edge_length() const;
  double mean_edge_length() const;
  Vec3 bbox_min() const;
  Vec3 bbox_max() const;

  TriangleMesh translated(const Vec3& offset) const;
  TriangleMesh flipped() const;

  // Present only on meshes produced by barycentric_refine.
  const std::vector<RefineInfo>& refine_info() const { return refine_info_; }
  bool is_refinement() const { return !refine_info_.empty(); }
  // Number of coarse vertices/edges of the parent mesh (refinements only).
  int parent_vertex_count() const { return parent_vertices_; }
  int parent_edge_count() const { return parent_edges_; }

 private:
  friend TriangleMesh barycentric_refine(const TriangleMesh&);
  void build();
  void orient();

  std::vector<Vec3> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<double> areas_;
  std::vector<Vec3> normals_;
  bool closed_ = false;
  std::vector<RefineInfo> refine_info_;
  int parent_vertices_ = 0;
  int parent_edges_ = 0;
};

enum class MeshFormat { kMshAscii, kSimpleTri };

MeshFormat parse_mesh_format(const std::string& name);
TriangleMesh load_mesh(const std::string& path, MeshFormat format);
TriangleMesh parse_mesh(const std::string& text, MeshFormat format);
void save_simple_tri(const TriangleMesh& mesh, const std::string& path);

TriangleMesh generate_box(const Vec3& center, const Vec3& dims, double target_edge);
TriangleMesh generate_sphere(const Vec3& center, double radius, int subdivisions);
// Flat rectangle in the plane z = center.z with nx by ny cells.
TriangleMesh generate_plate(const Vec3& center, double size_x, double size_y, int nx, int ny);
// Flat surface in z = origin.z made of the grid cells whose mask entry is
// set; mask is indexed [iy][ix], cell (ix, iy) spans origin + (ix*h, iy*h).
TriangleMesh generate_cell_mask(const Vec3& origin, double h, const std::vector<std::string>& mask);
// Symmetric cross (two orthogonal strips) centered at center in z = center.z.
TriangleMesh generate_cross(const Vec3& center, double arm_length, double arm_width, int cells_per_width);
// Strip along x folded at its midpoint by angle_deg about the y axis.
TriangleMesh generate_bent_strip(const Vec3& center, double length, double width, double angle_deg, int nx, int ny);
// Meander line: `turns` vertical runs of height `height` joined by
// horizontal runs of length `pitch`, traced with a strip of the given width.
TriangleMesh generate_meander(const Vec3& center, int turns, double pitch, double height, double width,
                              int cells_per_width);

TriangleMesh barycentric_refine(const TriangleMesh& mesh);
// Disjoint union; vertex, triangle and edge numbering follow the input order.
TriangleMesh concatenate(const std::vector<TriangleMesh>& parts);
TriangleMesh mirror_across_plane(const TriangleMesh& mesh, double plane_z);

// Generalized winding number of a closed mesh about point p (1 inside, 0 outside).
double winding_number(const TriangleMesh& closed_mesh, const Vec3& p);
double distance_to_mesh(const TriangleMesh& mesh, const Vec3& p);

struct ElementGeometry {
  TriangleMesh scatterer_mesh;   // local coordinates
  TriangleMesh equivalent_mesh;  // local coordinates, closed
  Vec3 translation = Vec3::Zero();
  std::uint64_t shape_id = 0;

  TriangleMesh world_scatterer() const { return scatterer_mesh.translated(translation); }
  TriangleMesh world_equivalent() const { return equivalent_mesh.translated(translation); }
};

std::uint64_t compute_shape_id(const TriangleMesh& scatterer, const TriangleMesh& equivalent);
// Checks containment and closedness; throws GeometryError on violation.
ElementGeometry make_element(TriangleMesh scatterer, TriangleMesh equivalent, const Vec3& translation);

}  // namespace mmsie
