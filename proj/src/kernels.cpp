#include "mmsie/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace mmsie {

MediumParams MediumParams::at(double frequency_hz) {
  if (!(frequency_hz > 0)) throw Error("frequency must be positive");
  MediumParams m;
  m.frequency = frequency_hz;
  m.omega = 2.0 * kPi * frequency_hz;
  m.k0 = m.omega * std::sqrt(m.mu0 * m.eps0);
  return m;
}

void QuadratureRule::validate() const {
  if (!is_supported_point_count(order) || !is_supported_point_count(near_order))
    throw Error("quadrature orders must be one of 1, 3, 4, 6, 7, 12");
  if (!(near_threshold >= 1.0)) throw Error("near_threshold must be at least 1");
  if (singular_order < 1 || singular_order > 20) throw Error("singular_order must be in [1, 20]");
}

QuadratureRule QuadratureRule::refined() const {
  auto up = [](int n) {
    const int levels[] = {1, 3, 4, 6, 7, 12};
    for (int l : levels)
      if (l > n) return l;
    return n;
  };
  QuadratureRule q = *this;
  q.order = up(order);
  q.near_order = up(near_order);
  q.singular_order = singular_order + 1;
  return q;
}

Complex green(const Vec3& r, const Vec3& r_src, double k0) {
  double R = (r - r_src).norm();
  if (R == 0.0) throw Error("Green's function evaluated at coincident points");
  return std::exp(Complex(0.0, -k0 * R)) / (4.0 * kPi * R);
}

CVec3 green_gradient(const Vec3& r, const Vec3& r_src, double k0) {
  Vec3 d = r - r_src;
  double R = d.norm();
  if (R == 0.0) throw Error("Green's function evaluated at coincident points");
  Complex g = -Complex(1.0, k0 * R) * std::exp(Complex(0.0, -k0 * R)) / (4.0 * kPi * R * R * R);
  return g * d.cast<Complex>();
}

namespace {

inline Complex green_r(double R, double k) {
  return Complex(std::cos(k * R), -std::sin(k * R)) / (4.0 * kPi * R);
}

// Scalar factor g with grad_r G = g (r - r').
inline Complex green_grad_factor(double R, double k) {
  double kr = k * R;
  return -Complex(1.0, kr) * Complex(std::cos(kr), -std::sin(kr)) / (4.0 * kPi * R * R * R);
}

// (exp(-jkR) - 1) / (4 pi R)
inline Complex remainder(double R, double k) {
  double s = std::sin(0.5 * k * R);
  return Complex(-2.0 * s * s, -std::sin(k * R)) / (4.0 * kPi * R);
}

// Factor g with grad_r [(exp(-jkR) - 1)/(4 pi R)] = g (r - r').
inline Complex remainder_grad_factor(double R, double k) {
  double x = k * R;
  Complex v;
  if (x < 0.1) {
    // 1 - (1 + jx) e^{-jx} = sum_{n>=2} (-jx)^n (n - 1) / n!
    Complex term(1.0, 0.0);
    Complex mjx(0.0, -x);
    double fact = 1.0;
    v = 0.0;
    for (int n = 1; n <= 12; ++n) {
      term *= mjx;
      fact *= n;
      if (n >= 2) v += term * (n - 1.0) / fact;
    }
  } else {
    v = 1.0 - Complex(1.0, x) * Complex(std::cos(x), -std::sin(x));
  }
  return v / (4.0 * kPi * R * R * R);
}

inline Vec3 tri_point(const TriCorners& p, double a1, double a2) {
  return (1.0 - a1 - a2) * p[0] + a1 * p[1] + a2 * p[2];
}

Vec3 unit_normal(const TriCorners& p) { return (p[1] - p[0]).cross(p[2] - p[0]).normalized(); }

}  // namespace

StaticPotentials static_potentials(const TriCorners& tri, const Vec3& r) {
  StaticPotentials out;
  out.grad_inv_r.setZero();
  out.rho_over_r.setZero();
  Vec3 n = unit_normal(tri);
  double d = n.dot(r - tri[0]);
  Vec3 rho = r - d * n;
  double ad = std::abs(d);
  double beta_sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Vec3& a = tri[i];
    const Vec3& b = tri[(i + 1) % 3];
    Vec3 l = b - a;
    double len = l.norm();
    Vec3 lh = l / len;
    Vec3 uh = lh.cross(n);
    double lp = (b - rho).dot(lh);
    double lm = (a - rho).dot(lh);
    double p0 = (a - rho).dot(uh);
    double r02 = p0 * p0 + d * d;
    double rp = std::sqrt(lp * lp + r02);
    double rm = std::sqrt(lm * lm + r02);
    double f2;
    if (lm >= 0.0)
      f2 = std::log((rp + lp) / (rm + lm));
    else if (lp <= 0.0)
      f2 = std::log((rm - lm) / (rp - lp));
    else
      f2 = std::log((rp + lp) * (rm - lm) / r02);
    double beta = 0.0;
    if (p0 != 0.0) beta = std::atan(p0 * lp / (r02 + ad * rp)) - std::atan(p0 * lm / (r02 + ad * rm));
    beta_sum += beta;
    out.inv_r += p0 * f2 - ad * beta;
    out.grad_inv_r -= uh * f2;
    double r02f2 = r02 > 0.0 ? r02 * f2 : 0.0;
    out.rho_over_r += 0.5 * uh * (r02f2 + lp * rp - lm * rm);
  }
  double sgn = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
  out.grad_inv_r -= n * (sgn * beta_sum);
  return out;
}

PairIntegrator::PairIntegrator(const TriangleMesh& test, const TriangleMesh& src, bool same_mesh,
                               const MediumParams& medium, const QuadratureRule& quad)
    : test_(test), src_(src), same_(same_mesh), k_(medium.k0), quad_(quad) {
  quad.validate();
  auto prepare = [&](const TriangleMesh& m, std::vector<TriData>& td, std::vector<Points>& far,
                     std::vector<Points>& near) {
    const auto& rf = triangle_rule_by_points(quad.order);
    const auto& rn = triangle_rule_by_points(quad.near_order);
    td.resize(m.num_triangles());
    far.resize(m.num_triangles());
    near.resize(m.num_triangles());
    for (std::size_t t = 0; t < m.num_triangles(); ++t) {
      int ti = static_cast<int>(t);
      TriData& d = td[t];
      d.p = {m.corner(ti, 0), m.corner(ti, 1), m.corner(ti, 2)};
      d.centroid = m.centroid(ti);
      d.normal = m.normal(ti);
      d.area = m.area(ti);
      d.diameter = m.diameter(ti);
      for (const auto& q : rf) {
        far[t].r.push_back(q.bary[0] * d.p[0] + q.bary[1] * d.p[1] + q.bary[2] * d.p[2]);
        far[t].w.push_back(q.weight * d.area);
      }
      // Near rule on the four midpoint children: the static outer integrand
      // varies on the scale of the pair separation.
      const Vec3 m01 = 0.5 * (d.p[0] + d.p[1]), m12 = 0.5 * (d.p[1] + d.p[2]), m20 = 0.5 * (d.p[2] + d.p[0]);
      const TriCorners kids[4] = {{d.p[0], m01, m20}, {m01, d.p[1], m12}, {m20, m12, d.p[2]}, {m12, m20, m01}};
      for (const auto& c : kids)
        for (const auto& q : rn) {
          near[t].r.push_back(q.bary[0] * c[0] + q.bary[1] * c[1] + q.bary[2] * c[2]);
          near[t].w.push_back(0.25 * q.weight * d.area);
        }
    }
  };
  prepare(test, tt_, test_far_, test_near_);
  prepare(src, ts_, src_far_, src_near_);
}

Adjacency PairIntegrator::classify(int t, int s, std::array<int, 3>& pt, std::array<int, 3>& ps) const {
  if (!same_) return Adjacency::kNone;
  const auto& a = test_.triangles()[t];
  const auto& b = src_.triangles()[s];
  int shared = 0;
  std::array<int, 3> ia{}, ib{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (a[i] == b[j]) {
        ia[shared] = i;
        ib[shared] = j;
        ++shared;
      }
  switch (shared) {
    case 3:
      pt = {ia[0], ia[1], ia[2]};
      ps = {ib[0], ib[1], ib[2]};
      return Adjacency::kCoincident;
    case 2:
      pt = {ia[0], ia[1], 3 - ia[0] - ia[1]};
      ps = {ib[0], ib[1], 3 - ib[0] - ib[1]};
      return Adjacency::kEdge;
    case 1:
      pt = {ia[0], (ia[0] + 1) % 3, (ia[0] + 2) % 3};
      ps = {ib[0], (ib[0] + 1) % 3, (ib[0] + 2) % 3};
      return Adjacency::kVertex;
    default:
      return Adjacency::kNone;
  }
}

bool PairIntegrator::is_near(int t, int s) const {
  // The fuzz keeps exact ties on structured meshes on one side regardless of
  // where the mesh sits in space.
  double dist = (tt_[t].centroid - ts_[s].centroid).norm();
  return dist < quad_.near_threshold * std::max(tt_[t].diameter, ts_[s].diameter) * (1.0 + 1e-9);
}

bool PairIntegrator::coplanar(int t, int s) const {
  const TriData& a = tt_[t];
  const TriData& b = ts_[s];
  if (std::abs(a.normal.dot(b.normal)) < 1.0 - 1e-12) return false;
  double scale = std::max(a.diameter, b.diameter);
  for (const auto& q : b.p)
    if (std::abs(a.normal.dot(q - a.p[0])) > 1e-12 * scale) return false;
  return true;
}

void PairIntegrator::L(int t, int s, Eigen::Matrix3cd& local, Complex& local0) const {
  local.setZero();
  local0 = 0.0;
  const TriData& A = tt_[t];
  const TriData& B = ts_[s];
  std::array<int, 3> pt{}, ps{};
  Adjacency adj = classify(t, s, pt, ps);
  if (adj != Adjacency::kNone) {
    const auto& rule = sauter_schwab(adj, quad_.singular_order);
    const double scale = 4.0 * A.area * B.area;
    TriCorners pa = {A.p[pt[0]], A.p[pt[1]], A.p[pt[2]]};
    TriCorners pb = {B.p[ps[0]], B.p[ps[1]], B.p[ps[2]]};
    for (const auto& q : rule) {
      Vec3 x = tri_point(pa, q.x1, q.x2);
      Vec3 y = tri_point(pb, q.y1, q.y2);
      Complex g = green_r((x - y).norm(), k_) * (q.weight * scale);
      local0 += g;
      for (int i = 0; i < 3; ++i) {
        Vec3 ai = x - A.p[i];
        for (int j = 0; j < 3; ++j) local(i, j) += g * ai.dot(y - B.p[j]);
      }
    }
    return;
  }
  if (is_near(t, s)) {
    const Points& xo = test_near_[t];
    const Points& yi = src_near_[s];
    for (std::size_t p = 0; p < xo.r.size(); ++p) {
      const Vec3& x = xo.r[p];
      StaticPotentials sp = static_potentials(B.p, x);
      Vec3 rho = x - B.normal.dot(x - B.p[0]) * B.normal;
      Complex in0 = sp.inv_r / (4.0 * kPi);
      CVec3 inu = ((rho - B.centroid) * sp.inv_r + sp.rho_over_r).cast<Complex>() / (4.0 * kPi);
      for (std::size_t q = 0; q < yi.r.size(); ++q) {
        Complex g = remainder((x - yi.r[q]).norm(), k_) * yi.w[q];
        in0 += g;
        inu += g * (yi.r[q] - B.centroid).cast<Complex>();
      }
      local0 += xo.w[p] * in0;
      for (int j = 0; j < 3; ++j) {
        CVec3 vj = inu - in0 * (B.p[j] - B.centroid).cast<Complex>();
        for (int i = 0; i < 3; ++i) local(i, j) += xo.w[p] * (x - A.p[i]).cast<Complex>().dot(vj);
      }
    }
    return;
  }
  const Points& xo = test_far_[t];
  const Points& yi = src_far_[s];
  for (std::size_t p = 0; p < xo.r.size(); ++p) {
    const Vec3& x = xo.r[p];
    Vec3 a[3] = {x - A.p[0], x - A.p[1], x - A.p[2]};
    for (std::size_t q = 0; q < yi.r.size(); ++q) {
      const Vec3& y = yi.r[q];
      Complex g = green_r((x - y).norm(), k_) * (xo.w[p] * yi.w[q]);
      local0 += g;
      for (int j = 0; j < 3; ++j) {
        Vec3 b = y - B.p[j];
        for (int i = 0; i < 3; ++i) local(i, j) += g * a[i].dot(b);
      }
    }
  }
}

void PairIntegrator::K(int t, int s, Eigen::Matrix3cd& local) const {
  local.setZero();
  if (coplanar(t, s)) return;
  const TriData& A = tt_[t];
  const TriData& B = ts_[s];
  std::array<int, 3> pt{}, ps{};
  Adjacency adj = classify(t, s, pt, ps);
  auto accumulate = [&](const Vec3& x, const CVec3& h, double w) {
    // local(i, j) += w (x - P_i) . (h x (x - Q_j)) using grad G parallel to x - y.
    for (int j = 0; j < 3; ++j) {
      CVec3 c = cross(h, (x - B.p[j]).cast<Complex>());
      for (int i = 0; i < 3; ++i) local(i, j) += w * (x - A.p[i]).cast<Complex>().dot(c);
    }
  };
  if (adj != Adjacency::kNone) {
    const auto& rule = sauter_schwab(adj, quad_.singular_order);
    const double scale = 4.0 * A.area * B.area;
    TriCorners pa = {A.p[pt[0]], A.p[pt[1]], A.p[pt[2]]};
    TriCorners pb = {B.p[ps[0]], B.p[ps[1]], B.p[ps[2]]};
    for (const auto& q : rule) {
      Vec3 x = tri_point(pa, q.x1, q.x2);
      Vec3 y = tri_point(pb, q.y1, q.y2);
      Vec3 d = x - y;
      Complex g = green_grad_factor(d.norm(), k_) * (q.weight * scale);
      // (x - P_i) . (g d x (y - Q_j))
      for (int j = 0; j < 3; ++j) {
        Vec3 c = d.cross(y - B.p[j]);
        for (int i = 0; i < 3; ++i) local(i, j) += g * (x - A.p[i]).dot(c);
      }
    }
    return;
  }
  if (is_near(t, s)) {
    const Points& xo = test_near_[t];
    const Points& yi = src_near_[s];
    for (std::size_t p = 0; p < xo.r.size(); ++p) {
      const Vec3& x = xo.r[p];
      StaticPotentials sp = static_potentials(B.p, x);
      CVec3 h = sp.grad_inv_r.cast<Complex>() / (4.0 * kPi);
      for (std::size_t q = 0; q < yi.r.size(); ++q) {
        Vec3 d = x - yi.r[q];
        h += (remainder_grad_factor(d.norm(), k_) * yi.w[q]) * d.cast<Complex>();
      }
      accumulate(x, h, xo.w[p]);
    }
    return;
  }
  const Points& xo = test_far_[t];
  const Points& yi = src_far_[s];
  for (std::size_t p = 0; p < xo.r.size(); ++p) {
    const Vec3& x = xo.r[p];
    CVec3 h = CVec3::Zero();
    for (std::size_t q = 0; q < yi.r.size(); ++q) {
      Vec3 d = x - yi.r[q];
      h += (green_grad_factor(d.norm(), k_) * yi.w[q]) * d.cast<Complex>();
    }
    accumulate(x, h, xo.w[p]);
  }
}

namespace {

bool same_support(const BasisSpace& a, const BasisSpace& b) { return a.support_ptr().get() == b.support_ptr().get(); }

}  // namespace

CMatrix assemble_L(const BasisSpace& test, const BasisSpace& src, const MediumParams& medium,
                   const QuadratureRule& quad) {
  const TriangleMesh& tm = test.support_mesh();
  const TriangleMesh& sm = src.support_mesh();
  const bool same = same_support(test, src);
  const bool symmetric = &test == &src;
  PairIntegrator integ(tm, sm, same, medium, quad);
  CMatrix z = CMatrix::Zero(static_cast<Eigen::Index>(test.dof_count()), static_cast<Eigen::Index>(src.dof_count()));
  const Complex jwmu(0.0, medium.omega * medium.mu0);
  const double inv_k2 = 1.0 / (medium.k0 * medium.k0);
  Eigen::Matrix3cd local;
  Complex local0;
  for (std::size_t t = 0; t < tm.num_triangles(); ++t) {
    const auto& pa = test.pieces(static_cast<int>(t));
    if (pa.empty()) continue;
    for (std::size_t s = symmetric ? t : 0; s < sm.num_triangles(); ++s) {
      const auto& pb = src.pieces(static_cast<int>(s));
      if (pb.empty()) continue;
      integ.L(static_cast<int>(t), static_cast<int>(s), local, local0);
      for (const auto& a : pa) {
        Eigen::Vector3d ca(a.c[0], a.c[1], a.c[2]);
        double diva = 2.0 * ca.sum();
        for (const auto& b : pb) {
          Eigen::Vector3d cb(b.c[0], b.c[1], b.c[2]);
          double divb = 2.0 * cb.sum();
          Complex v = jwmu * (ca.cast<Complex>().dot(local * cb.cast<Complex>()) - inv_k2 * diva * divb * local0);
          z(a.function, b.function) += v;
          if (symmetric && s != t) z(b.function, a.function) += v;
        }
      }
    }
  }
  return z;
}

CMatrix assemble_K(const BasisSpace& test, const BasisSpace& src, const MediumParams& medium,
                   const QuadratureRule& quad) {
  const TriangleMesh& tm = test.support_mesh();
  const TriangleMesh& sm = src.support_mesh();
  PairIntegrator integ(tm, sm, same_support(test, src), medium, quad);
  CMatrix z = CMatrix::Zero(static_cast<Eigen::Index>(test.dof_count()), static_cast<Eigen::Index>(src.dof_count()));
  Eigen::Matrix3cd local;
  for (std::size_t t = 0; t < tm.num_triangles(); ++t) {
    const auto& pa = test.pieces(static_cast<int>(t));
    if (pa.empty()) continue;
    for (std::size_t s = 0; s < sm.num_triangles(); ++s) {
      const auto& pb = src.pieces(static_cast<int>(s));
      if (pb.empty()) continue;
      integ.K(static_cast<int>(t), static_cast<int>(s), local);
      if (local.isZero(0.0)) continue;
      for (const auto& a : pa) {
        Eigen::Vector3cd ca(a.c[0], a.c[1], a.c[2]);
        for (const auto& b : pb) {
          Eigen::Vector3cd cb(b.c[0], b.c[1], b.c[2]);
          z(a.function, b.function) += ca.dot(local * cb);
        }
      }
    }
  }
  return z;
}

std::vector<Complex> assemble_L_entries(const BasisSpace& test, const BasisSpace& src,
                                        const std::vector<std::pair<int, int>>& pairs, const MediumParams& medium,
                                        const QuadratureRule& quad) {
  const TriangleMesh& tm = test.support_mesh();
  const TriangleMesh& sm = src.support_mesh();
  PairIntegrator integ(tm, sm, same_support(test, src), medium, quad);
  const bool symmetric = &test == &src;
  auto supports = [](const BasisSpace& b) {
    std::vector<std::vector<std::pair<int, Eigen::Vector3d>>> out(b.dof_count());
    for (std::size_t t = 0; t < b.support_mesh().num_triangles(); ++t)
      for (const auto& p : b.pieces(static_cast<int>(t)))
        out[p.function].emplace_back(static_cast<int>(t), Eigen::Vector3d(p.c[0], p.c[1], p.c[2]));
    return out;
  };
  auto ts = supports(test);
  auto ss = supports(src);
  struct Local {
    Eigen::Matrix3cd m;
    Complex m0;
  };
  const Complex jwmu(0.0, medium.omega * medium.mu0);
  const double inv_k2 = 1.0 / (medium.k0 * medium.k0);
  for (const auto& [m, n] : pairs)
    if (m < 0 || n < 0 || m >= static_cast<int>(ts.size()) || n >= static_cast<int>(ss.size()))
      throw DimensionError("entry index out of range");
  // Pairs are processed in chunks of consecutive test functions; each chunk
  // keeps its own cache of triangle-pair integrals.
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return pairs[x].first < pairs[y].first; });
  std::vector<std::size_t> chunk_start;
  constexpr int kChunkFunctions = 32;
  for (std::size_t i = 0; i < order.size(); ++i)
    if (i == 0 || pairs[order[i]].first / kChunkFunctions != pairs[order[i - 1]].first / kChunkFunctions)
      chunk_start.push_back(i);
  chunk_start.push_back(order.size());
  std::vector<Complex> out(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < chunk_start.size() - 1; ++c) {
    std::unordered_map<std::uint64_t, Local> cache;
    for (std::size_t i = chunk_start[c]; i < chunk_start[c + 1]; ++i) {
      auto [m, n] = pairs[order[i]];
      Complex acc = 0.0;
      for (const auto& [t, ca] : ts[m]) {
        for (const auto& [s, cb] : ss[n]) {
          std::uint64_t key = (static_cast<std::uint64_t>(t) << 32) | static_cast<std::uint32_t>(s);
          auto it = cache.find(key);
          if (it == cache.end()) {
            Local l;
            // Match assemble_L, which mirrors the upper triangle of symmetric blocks.
            if (symmetric && t > s) {
              integ.L(s, t, l.m, l.m0);
              l.m.transposeInPlace();
            } else {
              integ.L(t, s, l.m, l.m0);
            }
            it = cache.emplace(key, l).first;
          }
          acc += ca.cast<Complex>().dot(it->second.m * cb.cast<Complex>()) -
                 inv_k2 * (2.0 * ca.sum()) * (2.0 * cb.sum()) * it->second.m0;
        }
      }
      out[order[i]] = jwmu * acc;
    }
  }
  return out;
}

namespace {

// Single-triangle meshes do not carry adjacency; build a two-triangle mesh
// from exactly coincident corners instead.
struct PairMesh {
  TriangleMesh mesh;
  int t = 0, s = 1;
  bool same = false;
};

}  // namespace

Complex singular_pair_integral(const TriCorners& test, const TriCorners& src, PairKind kind, const MediumParams& medium,
                               const QuadratureRule& quad) {
  std::vector<Vec3> verts;
  auto vid = [&](const Vec3& p) {
    for (std::size_t i = 0; i < verts.size(); ++i)
      if (verts[i] == p) return static_cast<int>(i);
    verts.push_back(p);
    return static_cast<int>(verts.size() - 1);
  };
  Triangle ta{vid(test[0]), vid(test[1]), vid(test[2])};
  Triangle tb{vid(src[0]), vid(src[1]), vid(src[2])};
  bool coincident = std::is_permutation(ta.begin(), ta.end(), tb.begin());
  // The mesh constructor may reorient triangles; integrate on raw corner
  // lists instead by building meshes without relying on orientation.
  std::vector<Triangle> tris = {ta};
  if (!coincident) tris.push_back(tb);
  Eigen::Matrix3cd local;
  Complex local0;
  // Triangles of the mesh keep their vertex sets; map corner order back.
  TriangleMesh mesh = [&] {
    try {
      return TriangleMesh(verts, tris);
    } catch (const TopologyError&) {
      // Inconsistent orientation between the two: orient source independently.
      return TriangleMesh(verts, {ta, Triangle{tb[0], tb[2], tb[1]}});
    }
  }();
  int s_index = coincident ? 0 : 1;
  PairIntegrator integ(mesh, mesh, true, medium, quad);
  auto order_of = [&](int tri, const Triangle& want) {
    std::array<int, 3> perm{};
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j)
        if (mesh.triangles()[tri][j] == want[k]) perm[k] = j;
    return perm;
  };
  auto pa = order_of(0, ta);
  auto pb = order_of(s_index, tb);
  if (kind == PairKind::kK) {
    integ.K(0, s_index, local);
    return local(pa[0], pb[0]);
  }
  integ.L(0, s_index, local, local0);
  if (kind == PairKind::kLCharge) return local0;
  return local(pa[0], pb[0]);
}

}  // namespace mmsie
