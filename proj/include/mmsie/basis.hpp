#pragma once

#include <memory>
#include <vector>

#include "mmsie/mesh.hpp"

namespace mmsie {

struct RwgFunction {
  int edge_index = -1;
  int plus_triangle = -1;
  int minus_triangle = -1;
  double edge_length = 0.0;
  int free_vertex_plus = -1;
  int free_vertex_minus = -1;
};

struct DualRwgFunction {
  int parent_edge_index = -1;
  // (micro-RWG index on the refined mesh, weight)
  std::vector<std::pair<int, double>> coefficients;
};

// Restriction of one basis function to one triangle of the support mesh:
// f(r) = sum_k c[k] * (r - corner_k), divergence 2 * sum_k c[k].
struct TrianglePiece {
  int function = -1;
  std::array<double, 3> c{0.0, 0.0, 0.0};
};

enum class BasisKind { kRwg, kDualRwg };

class BasisSpace {
 public:
  BasisKind kind() const { return kind_; }
  const TriangleMesh& mesh() const { return *parent_; }
  // Mesh on whose triangles the pieces live (the refinement for dual spaces).
  const TriangleMesh& support_mesh() const { return *support_; }
  std::shared_ptr<const TriangleMesh> mesh_ptr() const { return parent_; }
  std::shared_ptr<const TriangleMesh> support_ptr() const { return support_; }
  std::size_t dof_count() const { return count_; }

  const std::vector<RwgFunction>& rwg() const { return rwg_; }
  const std::vector<DualRwgFunction>& dual() const { return dual_; }
  // Micro-RWG space on the refinement (dual spaces only).
  const BasisSpace& micro() const { return *micro_; }

  // Pieces on support triangle t.
  const std::vector<TrianglePiece>& pieces(int t) const { return by_triangle_[t]; }
  // Index of the basis function attached to each mesh edge, or -1.
  int function_of_edge(int edge) const { return edge_function_[edge]; }

  Vec3 evaluate(int function, int tri, const Vec3& r) const;
  double divergence(int function, int tri) const;

  // Same functions re-expressed on the 6-way refinement of the parent mesh.
  BasisSpace split_onto(std::shared_ptr<const TriangleMesh> refined) const;

 private:
  friend BasisSpace build_rwg(std::shared_ptr<const TriangleMesh> mesh);
  friend BasisSpace build_dual_rwg(std::shared_ptr<const TriangleMesh> mesh);

  BasisKind kind_ = BasisKind::kRwg;
  std::shared_ptr<const TriangleMesh> parent_;
  std::shared_ptr<const TriangleMesh> support_;
  std::size_t count_ = 0;
  std::vector<RwgFunction> rwg_;
  std::vector<DualRwgFunction> dual_;
  std::shared_ptr<const BasisSpace> micro_;
  std::vector<std::vector<TrianglePiece>> by_triangle_;
  std::vector<int> edge_function_;
};

BasisSpace build_rwg(std::shared_ptr<const TriangleMesh> mesh);
BasisSpace build_dual_rwg(std::shared_ptr<const TriangleMesh> mesh);
inline BasisSpace build_rwg(const TriangleMesh& mesh) { return build_rwg(std::make_shared<const TriangleMesh>(mesh)); }
inline BasisSpace build_dual_rwg(const TriangleMesh& mesh) {
  return build_dual_rwg(std::make_shared<const TriangleMesh>(mesh));
}

// D[n, n'] = <rwg_n, n_in x dual_n'> with n_in the inward normal.
RSparse assemble_gram(const BasisSpace& rwg, const BasisSpace& dual);

}  // namespace mmsie
