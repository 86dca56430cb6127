#include "mmsie/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

namespace mmsie {

namespace {

// +1 if triangle traverses a->b, -1 if b->a, 0 if the edge is absent.
int traversal(const Triangle& t, int a, int b) {
  for (int k = 0; k < 3; ++k) {
    int u = t[k], v = t[(k + 1) % 3];
    if (u == a && v == b) return 1;
    if (u == b && v == a) return -1;
  }
  return 0;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 ab = b - a, ac = c - a, ap = p - a;
  double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  Vec3 bp = p - b;
  double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
  Vec3 cp = p - c;
  double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
  double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  if (triangles_.empty()) throw TopologyError("mesh has no triangles");
  const int nv = static_cast<int>(vertices_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= nv)
        throw TopologyError("triangle " + std::to_string(t) + " references missing vertex " + std::to_string(tri[k]));
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw TopologyError("triangle " + std::to_string(t) + " has repeated vertices");
  }
  build();
  orient();
  areas_.resize(triangles_.size());
  normals_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    Vec3 a = corner(t, 0), b = corner(t, 1), c = corner(t, 2);
    Vec3 cr = (b - a).cross(c - a);
    double len = cr.norm();
    double scale = std::max({(b - a).squaredNorm(), (c - a).squaredNorm(), (c - b).squaredNorm()});
    if (!(len > 1e-12 * scale)) throw GeometryError("triangle " + std::to_string(t) + " has zero area");
    areas_[t] = 0.5 * len;
    normals_[t] = cr / len;
  }
}

void TriangleMesh::build() {
  std::map<std::pair<int, int>, std::vector<int>> table;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int a = triangles_[t][(k + 1) % 3], b = triangles_[t][(k + 2) % 3];
      table[{std::min(a, b), std::max(a, b)}].push_back(static_cast<int>(t));
    }
  }
  edges_.clear();
  edges_.reserve(table.size());
  tri_edges_.assign(triangles_.size(), {-1, -1, -1});
  closed_ = true;
  for (auto& [key, tris] : table) {
    if (tris.size() > 2)
      throw TopologyError("non-manifold edge (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                          ") shared by " + std::to_string(tris.size()) + " triangles");
    if (tris.size() == 2 && tris[0] == tris[1]) throw TopologyError("triangle uses an edge twice");
    Edge e;
    e.v0 = key.first;
    e.v1 = key.second;
    std::sort(tris.begin(), tris.end());
    e.tris[0] = tris[0];
    e.tris[1] = tris.size() == 2 ? tris[1] : -1;
    if (tris.size() == 1) closed_ = false;
    int idx = static_cast<int>(edges_.size());
    edges_.push_back(e);
    for (int t : tris) {
      for (int k = 0; k < 3; ++k) {
        int a = triangles_[t][(k + 1) % 3], b = triangles_[t][(k + 2) % 3];
        if (std::min(a, b) == key.first && std::max(a, b) == key.second) tri_edges_[t][k] = idx;
      }
    }
  }
}

void TriangleMesh::orient() {
  const std::size_t nt = triangles_.size();
  std::vector<int> flip(nt, -1);
  std::vector<std::vector<int>> components;
  for (std::size_t seed = 0; seed < nt; ++seed) {
    if (flip[seed] >= 0) continue;
    components.emplace_back();
    flip[seed] = 0;
    std::queue<int> q;
    q.push(static_cast<int>(seed));
    while (!q.empty()) {
      int t = q.front();
      q.pop();
      components.back().push_back(t);
      for (int k = 0; k < 3; ++k) {
        const Edge& e = edges_[tri_edges_[t][k]];
        if (!e.interior()) continue;
        int u = e.tris[0] == t ? e.tris[1] : e.tris[0];
        int st = traversal(triangles_[t], e.v0, e.v1) * (flip[t] ? -1 : 1);
        int su = traversal(triangles_[u], e.v0, e.v1);
        // Neighbours must traverse the shared edge in opposite directions.
        int want = (st == -su) ? 0 : 1;
        if (flip[u] < 0) {
          flip[u] = want;
          q.push(u);
        } else if (flip[u] != want) {
          throw TopologyError("mesh is not orientable");
        }
      }
    }
  }
  for (std::size_t t = 0; t < nt; ++t) {
    if (flip[t] == 1) std::swap(triangles_[t][1], triangles_[t][2]);
  }
  // tri_edges_ follows the local vertex permutation.
  for (std::size_t t = 0; t < nt; ++t) {
    if (flip[t] == 1) std::swap(tri_edges_[t][1], tri_edges_[t][2]);
  }
  if (!closed_) return;
  for (const auto& comp : components) {
    double vol = 0.0;
    for (int t : comp) {
      const auto& tri = triangles_[t];
      vol += vertices_[tri[0]].dot(vertices_[tri[1]].cross(vertices_[tri[2]]));
    }
    if (vol < 0) {
      for (int t : comp) {
        std::swap(triangles_[t][1], triangles_[t][2]);
        std::swap(tri_edges_[t][1], tri_edges_[t][2]);
      }
    }
  }
}

std::size_t TriangleMesh::num_interior_edges() const {
  return static_cast<std::size_t>(std::count_if(edges_.begin(), edges_.end(), [](const Edge& e) { return e.interior(); }));
}

Vec3 TriangleMesh::centroid(int t) const { return (corner(t, 0) + corner(t, 1) + corner(t, 2)) / 3.0; }

double TriangleMesh::diameter(int t) const {
  Vec3 a = corner(t, 0), b = corner(t, 1), c = corner(t, 2);
  return std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
}

int TriangleMesh::find_edge(int a, int b) const {
  auto key = std::make_pair(std::min(a, b), std::max(a, b));
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key, [](const Edge& e, const std::pair<int, int>& k) {
    return std::make_pair(e.v0, e.v1) < k;
  });
  if (it == edges_.end() || it->v0 != key.first || it->v1 != key.second) return -1;
  return static_cast<int>(it - edges_.begin());
}

double TriangleMesh::total_area() const {
  double s = 0.0;
  for (double a : areas_) s += a;
  return s;
}

double TriangleMesh::signed_volume() const {
  double vol = 0.0;
  for (const auto& tri : triangles_) vol += vertices_[tri[0]].dot(vertices_[tri[1]].cross(vertices_[tri[2]]));
  return vol / 6.0;
}

double TriangleMesh::max_edge_length() const {
  double m = 0.0;
  for (const auto& e : edges_) m = std::max(m, (vertices_[e.v1] - vertices_[e.v0]).norm());
  return m;
}

double TriangleMesh::mean_edge_length() const {
  double s = 0.0;
  for (const auto& e : edges_) s += (vertices_[e.v1] - vertices_[e.v0]).norm();
  return edges_.empty() ? 0.0 : s / edges_.size();
}

Vec3 TriangleMesh::bbox_min() const {
  Vec3 m = vertices_.at(0);
  for (const auto& v : vertices_) m = m.cwiseMin(v);
  return m;
}

Vec3 TriangleMesh::bbox_max() const {
  Vec3 m = vertices_.at(0);
  for (const auto& v : vertices_) m = m.cwiseMax(v);
  return m;
}

TriangleMesh TriangleMesh::translated(const Vec3& offset) const {
  TriangleMesh out = *this;
  for (auto& v : out.vertices_) v += offset;
  return out;
}

TriangleMesh concatenate(const std::vector<TriangleMesh>& parts) {
  std::vector<Vec3> verts;
  std::vector<Triangle> tris;
  for (const auto& m : parts) {
    int off = static_cast<int>(verts.size());
    verts.insert(verts.end(), m.vertices().begin(), m.vertices().end());
    for (const auto& t : m.triangles()) tris.push_back({t[0] + off, t[1] + off, t[2] + off});
  }
  return TriangleMesh(std::move(verts), std::move(tris));
}

TriangleMesh TriangleMesh::flipped() const {
  TriangleMesh out = *this;
  for (std::size_t t = 0; t < out.triangles_.size(); ++t) {
    std::swap(out.triangles_[t][1], out.triangles_[t][2]);
    std::swap(out.tri_edges_[t][1], out.tri_edges_[t][2]);
    out.normals_[t] = -out.normals_[t];
  }
  return out;
}

TriangleMesh barycentric_refine(const TriangleMesh& mesh) {
  const int nv = static_cast<int>(mesh.num_vertices());
  const int ne = static_cast<int>(mesh.num_edges());
  const int nt = static_cast<int>(mesh.num_triangles());
  std::vector<Vec3> verts;
  verts.reserve(nv + ne + nt);
  for (const auto& v : mesh.vertices()) verts.push_back(v);
  for (const auto& e : mesh.edges()) verts.push_back(0.5 * (mesh.vertex(e.v0) + mesh.vertex(e.v1)));
  for (int t = 0; t < nt; ++t) verts.push_back(mesh.centroid(t));
  std::vector<Triangle> tris;
  std::vector<RefineInfo> info;
  tris.reserve(6 * nt);
  info.reserve(6 * nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles()[t];
    int g = nv + ne + t;
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      int e = mesh.triangle_edge(t, (k + 2) % 3);
      int m = nv + e;
      tris.push_back({a, m, g});
      info.push_back({t, a, e});
      tris.push_back({m, b, g});
      info.push_back({t, b, e});
    }
  }
  TriangleMesh out(std::move(verts), std::move(tris));
  out.refine_info_ = std::move(info);
  out.parent_vertices_ = nv;
  out.parent_edges_ = ne;
  return out;
}

TriangleMesh mirror_across_plane(const TriangleMesh& mesh, double plane_z) {
  std::vector<Vec3> verts;
  verts.reserve(mesh.num_vertices());
  for (const auto& v : mesh.vertices()) {
    if (!(v.z() > plane_z)) throw GeometryError("mesh is not strictly above the mirror plane");
    verts.emplace_back(v.x(), v.y(), 2.0 * plane_z - v.z());
  }
  std::vector<Triangle> tris;
  tris.reserve(mesh.num_triangles());
  for (const auto& t : mesh.triangles()) tris.push_back({t[0], t[2], t[1]});
  return TriangleMesh(std::move(verts), std::move(tris));
}

double winding_number(const TriangleMesh& mesh, const Vec3& p) {
  double total = 0.0;
  for (const auto& tri : mesh.triangles()) {
    Vec3 a = mesh.vertex(tri[0]) - p, b = mesh.vertex(tri[1]) - p, c = mesh.vertex(tri[2]) - p;
    double la = a.norm(), lb = b.norm(), lc = c.norm();
    double num = a.dot(b.cross(c));
    double den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * kPi);
}

double distance_to_mesh(const TriangleMesh& mesh, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    Vec3 q = closest_point_on_triangle(p, mesh.corner(t, 0), mesh.corner(t, 1), mesh.corner(t, 2));
    best = std::min(best, (q - p).norm());
  }
  return best;
}

namespace {

using QPoint = std::array<long long, 3>;

QPoint quantize(const Vec3& v, const Vec3& c) {
  Vec3 d = (v - c) / 1e-9;
  return {std::llround(d.x()), std::llround(d.y()), std::llround(d.z())};
}

void fnv(std::uint64_t& h, long long value) {
  auto u = static_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) {
    h ^= (u >> (8 * i)) & 0xffu;
    h *= 1099511628211ull;
  }
}

// Order dependent on purpose: a cached macromodel is only valid for meshes
// that also share vertex and triangle numbering.
void hash_mesh(std::uint64_t& h, const TriangleMesh& mesh, const Vec3& c) {
  fnv(h, static_cast<long long>(mesh.num_vertices()));
  for (const auto& v : mesh.vertices())
    for (long long x : quantize(v, c)) fnv(h, x);
  fnv(h, static_cast<long long>(mesh.num_triangles()));
  for (const auto& t : mesh.triangles())
    for (int i : t) fnv(h, i);
}

}  // namespace

std::uint64_t compute_shape_id(const TriangleMesh& scatterer, const TriangleMesh& equivalent) {
  Vec3 c = Vec3::Zero();
  for (const auto& v : scatterer.vertices()) c += v;
  for (const auto& v : equivalent.vertices()) c += v;
  c /= static_cast<double>(scatterer.num_vertices() + equivalent.num_vertices());
  std::uint64_t h = 14695981039346656037ull;
  hash_mesh(h, scatterer, c);
  hash_mesh(h, equivalent, c);
  return h;
}

ElementGeometry make_element(TriangleMesh scatterer, TriangleMesh equivalent, const Vec3& translation) {
  if (!equivalent.closed()) throw GeometryError("equivalent surface is not closed");
  double scale = (equivalent.bbox_max() - equivalent.bbox_min()).norm();
  auto check = [&](const Vec3& p) {
    if (winding_number(equivalent, p) < 0.5)
      throw GeometryError("scatterer is not enclosed by its equivalent surface");
    if (distance_to_mesh(equivalent, p) < 1e-9 * scale)
      throw GeometryError("scatterer touches its equivalent surface");
  };
  for (const auto& v : scatterer.vertices()) check(v);
  for (std::size_t t = 0; t < scatterer.num_triangles(); ++t) check(scatterer.centroid(static_cast<int>(t)));
  for (const auto& e : scatterer.edges()) check(0.5 * (scatterer.vertex(e.v0) + scatterer.vertex(e.v1)));
  ElementGeometry g;
  g.shape_id = compute_shape_id(scatterer, equivalent);
  g.scatterer_mesh = std::move(scatterer);
  g.equivalent_mesh = std::move(equivalent);
  g.translation = translation;
  return g;
}

}  // namespace mmsie
