#include "mmsie/basis.hpp"

#include <algorithm>
#include <map>

#include "mmsie/quadrature.hpp"

namespace mmsie {

namespace {

int local_index(const Triangle& t, int v) {
  for (int k = 0; k < 3; ++k)
    if (t[k] == v) return k;
  throw TopologyError("vertex not in triangle");
}

// +1 if the triangle traverses a->b.
bool traverses(const Triangle& t, int a, int b) {
  for (int k = 0; k < 3; ++k)
    if (t[k] == a && t[(k + 1) % 3] == b) return true;
  return false;
}

void add_piece(std::vector<std::vector<TrianglePiece>>& by_tri, int tri, int function, int k, double c) {
  auto& list = by_tri[tri];
  auto it = std::find_if(list.begin(), list.end(), [&](const TrianglePiece& p) { return p.function == function; });
  if (it == list.end()) {
    list.push_back({function, {0.0, 0.0, 0.0}});
    it = list.end() - 1;
  }
  it->c[k] += c;
}

}  // namespace

BasisSpace build_rwg(std::shared_ptr<const TriangleMesh> mesh) {
  BasisSpace s;
  s.kind_ = BasisKind::kRwg;
  s.parent_ = mesh;
  s.support_ = mesh;
  s.by_triangle_.resize(mesh->num_triangles());
  s.edge_function_.assign(mesh->num_edges(), -1);
  for (std::size_t ei = 0; ei < mesh->num_edges(); ++ei) {
    const Edge& e = mesh->edges()[ei];
    if (!e.interior()) continue;
    RwgFunction f;
    f.edge_index = static_cast<int>(ei);
    f.plus_triangle = e.tris[0];
    f.minus_triangle = e.tris[1];
    f.edge_length = (mesh->vertex(e.v1) - mesh->vertex(e.v0)).norm();
    auto free_vertex = [&](int t) {
      for (int v : mesh->triangles()[t])
        if (v != e.v0 && v != e.v1) return v;
      return -1;
    };
    f.free_vertex_plus = free_vertex(f.plus_triangle);
    f.free_vertex_minus = free_vertex(f.minus_triangle);
    int idx = static_cast<int>(s.rwg_.size());
    s.edge_function_[ei] = idx;
    const auto& tp = mesh->triangles()[f.plus_triangle];
    const auto& tm = mesh->triangles()[f.minus_triangle];
    add_piece(s.by_triangle_, f.plus_triangle, idx, local_index(tp, f.free_vertex_plus),
              f.edge_length / (2.0 * mesh->area(f.plus_triangle)));
    add_piece(s.by_triangle_, f.minus_triangle, idx, local_index(tm, f.free_vertex_minus),
              -f.edge_length / (2.0 * mesh->area(f.minus_triangle)));
    s.rwg_.push_back(f);
  }
  if (s.rwg_.empty()) throw TopologyError("mesh has no interior edges");
  s.count_ = s.rwg_.size();
  return s;
}

BasisSpace build_dual_rwg(std::shared_ptr<const TriangleMesh> mesh) {
  if (!mesh->closed()) throw TopologyError("dual basis requires a closed mesh");
  auto refined = std::make_shared<const TriangleMesh>(barycentric_refine(*mesh));
  auto micro = std::make_shared<const BasisSpace>(build_rwg(refined));
  const TriangleMesh& rm = *refined;
  const int nv = static_cast<int>(mesh->num_vertices());

  BasisSpace s;
  s.kind_ = BasisKind::kDualRwg;
  s.parent_ = mesh;
  s.support_ = refined;
  s.micro_ = micro;
  s.edge_function_.assign(mesh->num_edges(), -1);

  // Micro-triangles holding coarse vertex v for coarse triangle t and coarse edge e.
  std::map<std::array<int, 3>, int> micro_of;
  for (std::size_t mt = 0; mt < rm.num_triangles(); ++mt) {
    const auto& info = rm.refine_info()[mt];
    micro_of[{info.parent_triangle, info.parent_vertex, info.parent_edge}] = static_cast<int>(mt);
  }
  auto other_across = [&](int tri, int a, int b) {
    const Edge& e = rm.edges()[rm.find_edge(a, b)];
    return e.tris[0] == tri ? e.tris[1] : e.tris[0];
  };

  std::vector<std::map<int, double>> weights;
  for (std::size_t ei = 0; ei < mesh->num_edges(); ++ei) {
    const Edge& ce = mesh->edges()[ei];
    int tp = ce.tris[0], tm = ce.tris[1];
    int va = ce.v0, vb = ce.v1;
    if (!traverses(mesh->triangles()[tp], va, vb)) std::swap(va, vb);
    const int m = nv + static_cast<int>(ei);
    const int gp = nv + static_cast<int>(mesh->num_edges()) + tp;
    const int gm = nv + static_cast<int>(mesh->num_edges()) + tm;
    const double scale = (mesh->vertex(vb) - mesh->vertex(va)).norm();
    std::map<int, double> w;
    // Adds flux `q` flowing from micro-triangle `from` to `to` across micro edge (a, b).
    auto flow = [&](int from, int to, int a, int b, double q) {
      int me = rm.find_edge(a, b);
      const Edge& e = rm.edges()[me];
      double sign = (e.tris[0] == from && e.tris[1] == to) ? 1.0 : -1.0;
      double len = (rm.vertex(b) - rm.vertex(a)).norm();
      w[micro->function_of_edge(me)] += scale * sign * q / len;
    };
    // Walk the fan of coarse vertex v from the micro-triangle in T+ at edge e
    // around to the one in T-; the cut at half-edge (v, m) carries no flux.
    auto fan = [&](int v, bool source) {
      std::vector<int> order;
      std::vector<int> spokes;  // far vertex of the radial edge crossed entering order[i]
      int cur = micro_of.at({tp, v, static_cast<int>(ei)});
      int came = m;
      order.push_back(cur);
      while (true) {
        const auto& t = rm.triangles()[cur];
        int next_spoke = -1;
        for (int u : t)
          if (u != v && u != came) next_spoke = u;
        if (next_spoke == m) break;
        int nxt = other_across(cur, v, next_spoke);
        spokes.push_back(next_spoke);
        order.push_back(nxt);
        cur = nxt;
        came = next_spoke;
      }
      const int n2 = static_cast<int>(order.size());
      const double nfan = 0.5 * n2;
      for (int i = 1; i < n2; ++i) {
        double q = source ? (i - nfan) / (2.0 * nfan) : (nfan - i) / (2.0 * nfan);
        flow(order[i - 1], order[i], v, spokes[i - 1], q);
      }
      return order;
    };
    auto fa = fan(va, true);
    auto fb = fan(vb, false);
    if (rm.refine_info()[fa.back()].parent_triangle != tm || rm.refine_info()[fb.back()].parent_triangle != tm)
      throw TopologyError("inconsistent fan around edge " + std::to_string(ei));
    flow(fa.front(), fb.front(), m, gp, 0.5);
    flow(fa.back(), fb.back(), m, gm, 0.5);
    weights.push_back(std::move(w));
    s.edge_function_[ei] = static_cast<int>(ei);
  }

  s.by_triangle_.resize(rm.num_triangles());
  for (std::size_t f = 0; f < weights.size(); ++f) {
    DualRwgFunction d;
    d.parent_edge_index = static_cast<int>(f);
    for (const auto& [mi, wt] : weights[f]) {
      if (wt == 0.0) continue;
      d.coefficients.emplace_back(mi, wt);
      const RwgFunction& mf = micro->rwg()[mi];
      for (int side = 0; side < 2; ++side) {
        int tri = side == 0 ? mf.plus_triangle : mf.minus_triangle;
        int fv = side == 0 ? mf.free_vertex_plus : mf.free_vertex_minus;
        double c = (side == 0 ? 1.0 : -1.0) * mf.edge_length / (2.0 * rm.area(tri));
        add_piece(s.by_triangle_, tri, static_cast<int>(f), local_index(rm.triangles()[tri], fv), wt * c);
      }
    }
    s.dual_.push_back(std::move(d));
  }
  s.count_ = s.dual_.size();
  return s;
}

Vec3 BasisSpace::evaluate(int function, int tri, const Vec3& r) const {
  Vec3 out = Vec3::Zero();
  for (const auto& p : by_triangle_[tri]) {
    if (p.function != function) continue;
    for (int k = 0; k < 3; ++k) out += p.c[k] * (r - support_->corner(tri, k));
  }
  return out;
}

double BasisSpace::divergence(int function, int tri) const {
  for (const auto& p : by_triangle_[tri])
    if (p.function == function) return 2.0 * (p.c[0] + p.c[1] + p.c[2]);
  return 0.0;
}

BasisSpace BasisSpace::split_onto(std::shared_ptr<const TriangleMesh> refined) const {
  if (kind_ != BasisKind::kRwg) throw Error("only RWG spaces can be split onto a refinement");
  if (!refined->is_refinement() || refined->refine_info().size() != 6 * parent_->num_triangles())
    throw DimensionError("mesh is not a refinement of this basis' mesh");
  BasisSpace s = *this;
  s.support_ = refined;
  s.by_triangle_.assign(refined->num_triangles(), {});
  for (std::size_t mt = 0; mt < refined->num_triangles(); ++mt) {
    int parent = refined->refine_info()[mt].parent_triangle;
    const auto& ptri = parent_->triangles()[parent];
    const auto& mtri = refined->triangles()[mt];
    for (const auto& p : by_triangle_[parent]) {
      TrianglePiece q{p.function, {0.0, 0.0, 0.0}};
      // Coarse vertex indices are preserved by the refinement, but a coarse
      // corner need not be a micro corner: re-express c_k (r - P_k) using
      // sum_k c_k (r - P_k) = C (r - X) with C = sum c_k, X = sum c_k P_k / C.
      double csum = p.c[0] + p.c[1] + p.c[2];
      Vec3 x = Vec3::Zero();
      for (int k = 0; k < 3; ++k) x += p.c[k] * parent_->vertex(ptri[k]);
      // Write C (r - X) = sum_j d_j (r - Q_j) with barycentric weights of X.
      Vec3 q0 = refined->vertex(mtri[0]), q1 = refined->vertex(mtri[1]), q2 = refined->vertex(mtri[2]);
      Eigen::Matrix3d a;
      a.col(0) = q0;
      a.col(1) = q1;
      a.col(2) = q2;
      // Solve d such that sum d_j = C and sum d_j Q_j = C X in the least-squares sense
      // (consistent because X lies in the plane of the micro-triangle).
      Eigen::Matrix<double, 4, 3> lhs;
      lhs.topRows<3>() = a;
      lhs.row(3) << 1.0, 1.0, 1.0;
      Eigen::Vector4d rhs;
      rhs.head<3>() = x;
      rhs(3) = csum;
      Eigen::Vector3d d = lhs.colPivHouseholderQr().solve(rhs);
      q.c = {d(0), d(1), d(2)};
      s.by_triangle_[mt].push_back(q);
    }
  }
  return s;
}

RSparse assemble_gram(const BasisSpace& rwg, const BasisSpace& dual) {
  if (rwg.kind() != BasisKind::kRwg || dual.kind() != BasisKind::kDualRwg)
    throw DimensionError("assemble_gram expects an RWG and a dual-RWG space");
  if (&rwg.mesh() != &dual.mesh() &&
      (rwg.mesh().num_triangles() != dual.mesh().num_triangles() ||
       rwg.mesh().num_vertices() != dual.mesh().num_vertices()))
    throw DimensionError("RWG and dual spaces live on different meshes");
  const TriangleMesh& rm = dual.support_mesh();
  const TriangleMesh& cm = rwg.mesh();
  const auto& rule = dunavant(2);
  std::map<std::pair<int, int>, double> acc;
  for (std::size_t mt = 0; mt < rm.num_triangles(); ++mt) {
    int ti = static_cast<int>(mt);
    int parent = rm.refine_info()[mt].parent_triangle;
    const auto& dp = dual.pieces(ti);
    const auto& rp = rwg.pieces(parent);
    if (dp.empty() || rp.empty()) continue;
    Vec3 n_in = -rm.normal(ti);
    double area = rm.area(ti);
    for (const auto& q : rule) {
      Vec3 r = q.bary[0] * rm.corner(ti, 0) + q.bary[1] * rm.corner(ti, 1) + q.bary[2] * rm.corner(ti, 2);
      for (const auto& a : rp) {
        Vec3 fa = Vec3::Zero();
        for (int k = 0; k < 3; ++k) fa += a.c[k] * (r - cm.corner(parent, k));
        for (const auto& b : dp) {
          Vec3 fb = Vec3::Zero();
          for (int k = 0; k < 3; ++k) fb += b.c[k] * (r - rm.corner(ti, k));
          acc[{a.function, b.function}] += q.weight * area * fa.dot(n_in.cross(fb));
        }
      }
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(acc.size());
  for (const auto& [key, v] : acc) trip.emplace_back(key.first, key.second, v);
  RSparse d(static_cast<Eigen::Index>(rwg.dof_count()), static_cast<Eigen::Index>(dual.dof_count()));
  d.setFromTriplets(trip.begin(), trip.end());
  return d;
}

}  // namespace mmsie
