#include <cmath>
#include <map>

#include "mmsie/mesh.hpp"

namespace mmsie {

namespace {

// Quad (a, b, c, d) in counter-clockwise order split along a diagonal.
void add_quad(std::vector<Triangle>& tris, int a, int b, int c, int d, bool alt) {
  if (alt) {
    tris.push_back({a, b, d});
    tris.push_back({b, c, d});
  } else {
    tris.push_back({a, b, c});
    tris.push_back({a, c, d});
  }
}

struct Lattice2 {
  std::map<std::pair<int, int>, int> index;
  std::vector<Vec3> verts;
  int at(int i, int j, const Vec3& p) {
    auto [it, inserted] = index.emplace(std::make_pair(i, j), static_cast<int>(verts.size()));
    if (inserted) verts.push_back(p);
    return it->second;
  }
};

}  // namespace

TriangleMesh generate_box(const Vec3& center, const Vec3& dims, double target_edge) {
  if (!(dims.minCoeff() > 0) || !(target_edge > 0)) throw GeometryError("box dimensions and target edge must be positive");
  // Cell diagonals are the longest edges.
  double h = target_edge / std::sqrt(2.0);
  std::array<int, 3> n{};
  for (int a = 0; a < 3; ++a) n[a] = std::max(1, static_cast<int>(std::ceil(dims[a] / h - 1e-9)));
  std::map<std::array<int, 3>, int> index;
  std::vector<Vec3> verts;
  Vec3 lo = center - 0.5 * dims;
  auto vid = [&](std::array<int, 3> ijk) {
    auto [it, inserted] = index.emplace(ijk, static_cast<int>(verts.size()));
    if (inserted) {
      Vec3 p;
      for (int a = 0; a < 3; ++a) p[a] = ijk[a] == n[a] ? lo[a] + dims[a] : lo[a] + dims[a] * ijk[a] / n[a];
      verts.push_back(p);
    }
    return it->second;
  };
  std::vector<Triangle> tris;
  for (int axis = 0; axis < 3; ++axis) {
    int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < n[u]; ++i) {
        for (int j = 0; j < n[v]; ++j) {
          auto p = [&](int di, int dj) {
            std::array<int, 3> ijk{};
            ijk[axis] = side ? n[axis] : 0;
            ijk[u] = i + di;
            ijk[v] = j + dj;
            return vid(ijk);
          };
          int a = p(0, 0), b = p(1, 0), c = p(1, 1), d = p(0, 1);
          bool alt = ((i + j) % 2) == 1;
          // (u, v, axis) is right-handed: counter-clockwise in (u, v) faces +axis.
          if (side)
            add_quad(tris, a, b, c, d, alt);
          else
            add_quad(tris, a, d, c, b, !alt);
        }
      }
    }
  }
  return TriangleMesh(std::move(verts), std::move(tris));
}

TriangleMesh generate_sphere(const Vec3& center, double radius, int subdivisions) {
  if (!(radius > 0)) throw GeometryError("sphere radius must be positive");
  if (subdivisions < 0) throw GeometryError("subdivisions must be non-negative");
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  std::vector<Vec3> verts = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0}, {0, -1, phi}, {0, 1, phi},
                             {0, -1, -phi}, {0, 1, -phi}, {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<Triangle> tris = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                                {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                                {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto [it, inserted] = mid.emplace(key, static_cast<int>(verts.size()));
      if (inserted) verts.push_back((verts[a] + verts[b]).normalized());
      return it->second;
    };
    std::vector<Triangle> next;
    next.reserve(tris.size() * 4);
    for (const auto& t : tris) {
      int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }
  for (auto& v : verts) v = center + radius * v;
  return TriangleMesh(std::move(verts), std::move(tris));
}

TriangleMesh generate_plate(const Vec3& center, double size_x, double size_y, int nx, int ny) {
  if (!(size_x > 0) || !(size_y > 0) || nx < 1 || ny < 1) throw GeometryError("invalid plate parameters");
  Lattice2 lat;
  std::vector<Triangle> tris;
  Vec3 lo = center - Vec3(0.5 * size_x, 0.5 * size_y, 0.0);
  auto p = [&](int i, int j) { return lat.at(i, j, lo + Vec3(size_x * i / nx, size_y * j / ny, 0.0)); };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) add_quad(tris, p(i, j), p(i + 1, j), p(i + 1, j + 1), p(i, j + 1), (i + j) % 2 == 1);
  return TriangleMesh(std::move(lat.verts), std::move(tris));
}

TriangleMesh generate_cell_mask(const Vec3& origin, double h, const std::vector<std::string>& mask) {
  if (!(h > 0)) throw GeometryError("cell size must be positive");
  Lattice2 lat;
  std::vector<Triangle> tris;
  auto p = [&](int i, int j) { return lat.at(i, j, origin + Vec3(h * i, h * j, 0.0)); };
  for (std::size_t j = 0; j < mask.size(); ++j) {
    for (std::size_t i = 0; i < mask[j].size(); ++i) {
      char c = mask[j][i];
      if (c == '.' || c == ' ' || c == '0') continue;
      int ii = static_cast<int>(i), jj = static_cast<int>(j);
      add_quad(tris, p(ii, jj), p(ii + 1, jj), p(ii + 1, jj + 1), p(ii, jj + 1), (ii + jj) % 2 == 1);
    }
  }
  if (tris.empty()) throw GeometryError("cell mask selects no cells");
  return TriangleMesh(std::move(lat.verts), std::move(tris));
}

TriangleMesh generate_cross(const Vec3& center, double arm_length, double arm_width, int cells_per_width) {
  if (!(arm_length > arm_width) || !(arm_width > 0) || cells_per_width < 1)
    throw GeometryError("invalid cross parameters");
  double h = arm_width / cells_per_width;
  int n = static_cast<int>(std::lround(arm_length / h));
  if ((n - cells_per_width) % 2 != 0) ++n;
  int lo = (n - cells_per_width) / 2, hi = lo + cells_per_width;
  std::vector<std::string> mask(n, std::string(n, '.'));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if ((i >= lo && i < hi) || (j >= lo && j < hi)) mask[j][i] = '#';
  Vec3 origin = center - Vec3(0.5 * n * h, 0.5 * n * h, 0.0);
  return generate_cell_mask(origin, h, mask);
}

TriangleMesh generate_bent_strip(const Vec3& center, double length, double width, double angle_deg, int nx, int ny) {
  if (nx % 2 != 0) throw GeometryError("bent strip needs an even number of cells along its length");
  TriangleMesh flat = generate_plate(Vec3::Zero(), length, width, nx, ny);
  double a = angle_deg * kPi / 180.0;
  std::vector<Vec3> verts = flat.vertices();
  for (auto& v : verts) {
    if (v.x() > 0) v = Vec3(v.x() * std::cos(a), v.y(), v.x() * std::sin(a));
    v += center;
  }
  return TriangleMesh(std::move(verts), flat.triangles());
}

TriangleMesh generate_meander(const Vec3& center, int turns, double pitch, double height, double width,
                              int cells_per_width) {
  if (turns < 1 || cells_per_width < 1 || !(width > 0)) throw GeometryError("invalid meander parameters");
  double h = width / cells_per_width;
  int c = cells_per_width;
  int p = static_cast<int>(std::lround(pitch / h));
  int hc = static_cast<int>(std::lround(height / h));
  if (p <= c || hc < 2 * c) throw GeometryError("meander pitch and height must exceed the strip width");
  int nx = (turns - 1) * p + c;
  std::vector<std::string> mask(hc, std::string(nx, '.'));
  for (int r = 0; r < turns; ++r) {
    for (int j = 0; j < hc; ++j)
      for (int i = r * p; i < r * p + c; ++i) mask[j][i] = '#';
    if (r + 1 < turns) {
      int j0 = (r % 2 == 0) ? hc - c : 0;
      for (int j = j0; j < j0 + c; ++j)
        for (int i = r * p; i < (r + 1) * p + c; ++i) mask[j][i] = '#';
    }
  }
  Vec3 origin = center - Vec3(0.5 * nx * h, 0.5 * hc * h, 0.0);
  return generate_cell_mask(origin, h, mask);
}

}  // namespace mmsie
