#include <doctest.h>

#include <cmath>

#include "mmsie/basis.hpp"

using namespace mmsie;

namespace {

TriangleMesh tetra() {
  return parse_mesh("v 1 1 1\nv 1 -1 -1\nv -1 1 -1\nv -1 -1 1\nf 0 1 2\nf 0 3 1\nf 0 2 3\nf 1 3 2\n",
                    MeshFormat::kSimpleTri);
}

// Normal component of `f` across every interior edge of the support mesh
// must match from both sides.
void check_normal_continuity(const BasisSpace& s) {
  const TriangleMesh& m = s.support_mesh();
  for (std::size_t fi = 0; fi < s.dof_count(); ++fi) {
    int f = static_cast<int>(fi);
    for (const auto& e : m.edges()) {
      if (!e.interior()) continue;
      Vec3 a = m.vertex(e.v0), b = m.vertex(e.v1);
      for (double t : {0.2, 0.5, 0.9}) {
        Vec3 r = a + t * (b - a);
        // In-plane unit normal to the edge pointing out of tris[0].
        Vec3 tangent = (b - a).normalized();
        Vec3 nu0 = tangent.cross(m.normal(e.tris[0]));
        if (nu0.dot(m.centroid(e.tris[0]) - r) > 0) nu0 = -nu0;
        Vec3 nu1 = tangent.cross(m.normal(e.tris[1]));
        if (nu1.dot(m.centroid(e.tris[1]) - r) < 0) nu1 = -nu1;
        double out0 = s.evaluate(f, e.tris[0], r).dot(nu0);
        double in1 = s.evaluate(f, e.tris[1], r).dot(nu1);
        CHECK(std::abs(out0 - in1) <= 1e-12 * std::max(1.0, std::abs(out0)));
      }
    }
  }
}

}  // namespace

TEST_CASE("build_rwg counts and ordering") {
  auto two = parse_mesh("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 0 1 2\nf 0 2 3\n", MeshFormat::kSimpleTri);
  CHECK(build_rwg(two).dof_count() == 1);
  CHECK(build_rwg(tetra()).dof_count() == 6);
  auto s1 = generate_sphere(Vec3::Zero(), 1.0, 1);
  auto b1 = build_rwg(s1);
  auto b2 = build_rwg(s1);
  CHECK(b1.dof_count() == 120);
  for (std::size_t i = 0; i < b1.dof_count(); ++i) {
    CHECK(b1.rwg()[i].edge_index == b2.rwg()[i].edge_index);
    CHECK(b1.rwg()[i].plus_triangle == b2.rwg()[i].plus_triangle);
  }
  auto single = parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n", MeshFormat::kSimpleTri);
  CHECK_THROWS_AS(build_rwg(single), TopologyError);
}

TEST_CASE("RWG divergence and normal continuity") {
  auto m = generate_sphere(Vec3::Zero(), 1.0, 1);
  auto b = build_rwg(m);
  for (std::size_t i = 0; i < b.dof_count(); ++i) {
    const auto& f = b.rwg()[i];
    double dp = b.divergence(static_cast<int>(i), f.plus_triangle);
    double dm = b.divergence(static_cast<int>(i), f.minus_triangle);
    CHECK(dp == doctest::Approx(f.edge_length / m.area(f.plus_triangle)).epsilon(1e-12));
    CHECK(dm == doctest::Approx(-f.edge_length / m.area(f.minus_triangle)).epsilon(1e-12));
    CHECK(std::abs(dp * m.area(f.plus_triangle) + dm * m.area(f.minus_triangle)) <= 1e-12 * f.edge_length);
  }
  check_normal_continuity(b);
}

TEST_CASE("dual RWG functions") {
  auto tet = tetra();
  auto dt = build_dual_rwg(tet);
  CHECK(dt.dof_count() == 6);
  auto s1 = generate_sphere(Vec3::Zero(), 1.0, 1);
  auto d1 = build_dual_rwg(s1);
  CHECK(d1.dof_count() == 120);
  CHECK(d1.micro().dof_count() == 3 * 6 * 80 / 2);
  check_normal_continuity(d1);
  const TriangleMesh& rm = d1.support_mesh();
  for (std::size_t f = 0; f < d1.dof_count(); ++f) {
    double total = 0.0, absolute = 0.0;
    for (std::size_t t = 0; t < rm.num_triangles(); ++t) {
      double q = d1.divergence(static_cast<int>(f), static_cast<int>(t)) * rm.area(static_cast<int>(t));
      total += q;
      absolute += std::abs(q);
    }
    CHECK(std::abs(total) <= 1e-10 * absolute);
    // Support: micro-triangles whose coarse vertex is an endpoint of the parent edge.
    const Edge& pe = s1.edges()[d1.dual()[f].parent_edge_index];
    for (std::size_t t = 0; t < rm.num_triangles(); ++t) {
      bool has = false;
      for (const auto& p : d1.pieces(static_cast<int>(t)))
        if (p.function == static_cast<int>(f)) has = true;
      if (has) {
        int v = rm.refine_info()[t].parent_vertex;
        CHECK((v == pe.v0 || v == pe.v1));
      }
    }
  }
  auto open = generate_plate(Vec3::Zero(), 1.0, 1.0, 2, 2);
  CHECK_THROWS_AS(build_dual_rwg(open), TopologyError);
}

TEST_CASE("Gram matrix is diagonally dominant and well conditioned") {
  for (const auto& mesh : {tetra(), generate_sphere(Vec3::Zero(), 1.0, 1), generate_box(Vec3::Zero(), Vec3(1, 1, 1.2), 0.5)}) {
    auto shared = std::make_shared<const TriangleMesh>(mesh);
    auto rwg = build_rwg(shared);
    auto dual = build_dual_rwg(shared);
    RSparse d = assemble_gram(rwg, dual);
    Eigen::MatrixXd dd(d);
    for (int i = 0; i < dd.rows(); ++i) {
      CHECK(dd(i, i) > 0);
      for (int j = 0; j < dd.cols(); ++j)
        if (j != i) CHECK(std::abs(dd(i, j)) < dd(i, i));
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dd);
    double smin = svd.singularValues().minCoeff();
    CHECK(smin > 0);
    CHECK(svd.singularValues().maxCoeff() / smin <= 100.0);
  }
}

TEST_CASE("Gram entries vanish for disjoint supports") {
  auto mesh = std::make_shared<const TriangleMesh>(generate_sphere(Vec3::Zero(), 1.0, 2));
  auto rwg = build_rwg(mesh);
  auto dual = build_dual_rwg(mesh);
  Eigen::MatrixXd dd(assemble_gram(rwg, dual));
  const auto& e0 = mesh->edges()[rwg.rwg()[0].edge_index];
  Vec3 c0 = 0.5 * (mesh->vertex(e0.v0) + mesh->vertex(e0.v1));
  int zeros = 0;
  for (int j = 0; j < dd.cols(); ++j) {
    const auto& e = mesh->edges()[dual.dual()[j].parent_edge_index];
    Vec3 c = 0.5 * (mesh->vertex(e.v0) + mesh->vertex(e.v1));
    if ((c - c0).norm() > 4 * mesh->max_edge_length()) {
      CHECK(dd(0, j) == 0.0);
      ++zeros;
    }
  }
  CHECK(zeros > 0);
}

TEST_CASE("split_onto reproduces the coarse functions") {
  auto mesh = std::make_shared<const TriangleMesh>(generate_sphere(Vec3::Zero(), 1.0, 1));
  auto rwg = build_rwg(mesh);
  auto refined = std::make_shared<const TriangleMesh>(barycentric_refine(*mesh));
  auto split = rwg.split_onto(refined);
  for (std::size_t mt = 0; mt < refined->num_triangles(); ++mt) {
    int t = static_cast<int>(mt);
    int parent = refined->refine_info()[mt].parent_triangle;
    Vec3 r = refined->centroid(t);
    for (const auto& p : split.pieces(t)) {
      Vec3 a = split.evaluate(p.function, t, r);
      Vec3 b = rwg.evaluate(p.function, parent, r);
      CHECK((a - b).norm() <= 1e-12 * std::max(1.0, b.norm()));
    }
  }
}
