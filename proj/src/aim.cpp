#include "mmsie/aim.hpp"

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "mmsie/quadrature.hpp"

namespace mmsie {

namespace {

int fft_size(int minimum) {
  for (int n = std::max(minimum, 1);; ++n) {
    int m = n;
    for (int f : {2, 3, 5, 7})
      while (m % f == 0) m /= f;
    if (m == 1) return n;
  }
}

std::array<double, 8> lagrange(double u, int order) {
  std::array<double, 8> l{};
  for (int a = 0; a <= order; ++a) {
    double v = 1.0;
    for (int b = 0; b <= order; ++b)
      if (b != a) v *= (u - b) / double(a - b);
    l[a] = v;
  }
  return l;
}

int stencil_points(int order) { return (order + 1) * (order + 1) * (order + 1); }

}  // namespace

void AimParams::validate() const {
  if (order < 1 || order > 7) throw Error("AIM order must lie in [1, 7]");
  if (near_stencils < 0) throw Error("AIM near-field stencil count must be non-negative");
  if (spacing_m < 0.0) throw Error("AIM spacing must be positive");
  if (!is_supported_point_count(projection_points)) throw Error("unsupported AIM projection rule");
}

Eigen::Vector3i AimGrid::stencils() const {
  Eigen::Vector3i s;
  for (int a = 0; a < 3; ++a) s[a] = std::max(1, (counts[a] - 1 + order - 1) / order);
  return s;
}

Eigen::Vector3i AimGrid::stencil_base(const Vec3& p) const {
  Vec3 u = (p - origin) / spacing;
  Eigen::Vector3i b;
  for (int a = 0; a < 3; ++a) b[a] = static_cast<int>(std::floor(u[a] - 0.5 * (order - 1)));
  return b;
}

AimGrid build_grid(const Vec3& lo, const Vec3& hi, const AimParams& params, const MediumParams& medium) {
  params.validate();
  AimGrid g;
  g.order = params.order;
  g.near_stencils = params.near_stencils;
  g.spacing = params.spacing_m > 0.0 ? params.spacing_m : 0.1 * medium.wavelength();
  const Vec3 center = 0.5 * (lo + hi);
  const int margin = params.order;
  for (int a = 0; a < 3; ++a) {
    double cells = std::ceil((hi[a] - lo[a]) / g.spacing - 1e-9);
    double n = cells + 2 * margin + 1;
    if (n > 1e5) throw GeometryError("geometry exceeds the addressable AIM grid");
    g.counts[a] = static_cast<int>(n);
  }
  g.origin = center - 0.5 * g.spacing * (g.counts.cast<double>() - Vec3::Ones());
  if (static_cast<double>(g.counts.prod()) > 2e8) throw GeometryError("geometry exceeds the addressable AIM grid");
  return g;
}

AimProjection build_projection(const AimGrid& grid, const BasisSpace& space, int quad_points) {
  const TriangleMesh& m = space.support_mesh();
  const auto& rule = triangle_rule_by_points(quad_points);
  const int o = grid.order;
  const int sp = stencil_points(o);
  const auto nf = static_cast<Eigen::Index>(space.dof_count());
  std::vector<Vec3> center(nf, Vec3::Zero());
  std::vector<int> count(nf, 0);
  for (std::size_t t = 0; t < m.num_triangles(); ++t)
    for (const auto& pc : space.pieces(static_cast<int>(t))) {
      center[pc.function] += m.centroid(static_cast<int>(t));
      ++count[pc.function];
    }
  AimProjection out;
  out.base.resize(nf);
  for (Eigen::Index n = 0; n < nf; ++n) {
    if (count[n] == 0) throw Error("basis function without support");
    out.base[n] = grid.stencil_base(center[n] / count[n]);
    for (int a = 0; a < 3; ++a)
      if (out.base[n][a] < 0 || out.base[n][a] + o >= grid.counts[a])
        throw GeometryError("basis function " + std::to_string(n) + " lies outside the AIM grid");
  }
  std::vector<RMatrix> w(nf, RMatrix::Zero(4, sp));
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const int ti = static_cast<int>(t);
    const auto& pieces = space.pieces(ti);
    if (pieces.empty()) continue;
    const Vec3 p[3] = {m.corner(ti, 0), m.corner(ti, 1), m.corner(ti, 2)};
    for (const auto& q : rule) {
      Vec3 r = q.bary[0] * p[0] + q.bary[1] * p[1] + q.bary[2] * p[2];
      double wq = q.weight * m.area(ti);
      for (const auto& pc : pieces) {
        const Eigen::Vector3i& b = out.base[pc.function];
        Vec3 u = (r - grid.origin) / grid.spacing - b.cast<double>();
        auto lx = lagrange(u[0], o), ly = lagrange(u[1], o), lz = lagrange(u[2], o);
        Vec3 f = pc.c[0] * (r - p[0]) + pc.c[1] * (r - p[1]) + pc.c[2] * (r - p[2]);
        double div = 2.0 * (pc.c[0] + pc.c[1] + pc.c[2]);
        RMatrix& wf = w[pc.function];
        int s = 0;
        for (int i = 0; i <= o; ++i)
          for (int j = 0; j <= o; ++j)
            for (int k = 0; k <= o; ++k, ++s) {
              double l = lx[i] * ly[j] * lz[k] * wq;
              wf(0, s) += l * f.x();
              wf(1, s) += l * f.y();
              wf(2, s) += l * f.z();
              wf(3, s) += l * div;
            }
      }
    }
  }
  for (int psi = 0; psi < 4; ++psi) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(nf) * sp);
    for (Eigen::Index n = 0; n < nf; ++n) {
      const auto& b = out.base[n];
      int s = 0;
      for (int i = 0; i <= o; ++i)
        for (int j = 0; j <= o; ++j)
          for (int k = 0; k <= o; ++k, ++s)
            if (w[n](psi, s) != 0.0)
              trip.emplace_back(static_cast<int>(grid.index(b[0] + i, b[1] + j, b[2] + k)), static_cast<int>(n),
                                w[n](psi, s));
    }
    out.p[psi].resize(grid.size(), nf);
    out.p[psi].setFromTriplets(trip.begin(), trip.end());
  }
  return out;
}

struct AimOperator::Fft {
  Eigen::Vector3i dims;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  fftw_complex* scratch = nullptr;

  explicit Fft(const Eigen::Vector3i& d) : dims(d) {
    const std::size_t n = static_cast<std::size_t>(d.prod());
    scratch = fftw_alloc_complex(n);
    forward = fftw_plan_dft_3d(d[0], d[1], d[2], scratch, scratch, FFTW_FORWARD, FFTW_ESTIMATE);
    backward = fftw_plan_dft_3d(d[0], d[1], d[2], scratch, scratch, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!forward || !backward) throw Error("FFTW planning failed");
  }
  ~Fft() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    fftw_free(scratch);
  }
};

AimOperator::~AimOperator() = default;

Complex AimOperator::kernel_sample(const Eigen::Vector3i& d) const {
  Eigen::Index i = d[0] < 0 ? d[0] + padded_[0] : d[0];
  Eigen::Index j = d[1] < 0 ? d[1] + padded_[1] : d[1];
  Eigen::Index k = d[2] < 0 ? d[2] + padded_[2] : d[2];
  return kernel_[static_cast<std::size_t>((i * padded_[1] + j) * padded_[2] + k)];
}

void AimOperator::build_kernel() {
  const Eigen::Vector3i& c = grid_.counts;
  for (int a = 0; a < 3; ++a) padded_[a] = fft_size(2 * c[a] - 1);
  const std::size_t total = static_cast<std::size_t>(padded_.prod());
  kernel_.assign(total, Complex(0.0, 0.0));
  auto offset = [](int i, int n, int p) { return i < n ? i : (i > p - n ? i - p : p); };
  for (int i = 0; i < padded_[0]; ++i)
    for (int j = 0; j < padded_[1]; ++j)
      for (int k = 0; k < padded_[2]; ++k) {
        int di = offset(i, c[0], padded_[0]), dj = offset(j, c[1], padded_[1]), dk = offset(k, c[2], padded_[2]);
        if (di == padded_[0] || dj == padded_[1] || dk == padded_[2]) continue;
        if (di == 0 && dj == 0 && dk == 0) continue;  // G(0) = 0
        double r = grid_.spacing * std::sqrt(double(di) * di + double(dj) * dj + double(dk) * dk);
        double kr = medium_.k0 * r;
        kernel_[(std::size_t(i) * padded_[1] + j) * padded_[2] + k] =
            Complex(std::cos(kr), -std::sin(kr)) / (4.0 * kPi * r);
      }
  fft_ = std::make_unique<Fft>(padded_);
  kernel_fft_ = kernel_;
  fftw_execute_dft(fft_->forward, reinterpret_cast<fftw_complex*>(kernel_fft_.data()),
                   reinterpret_cast<fftw_complex*>(kernel_fft_.data()));
  const double scale = 1.0 / static_cast<double>(total);
  for (auto& v : kernel_fft_) v *= scale;
  ++kernel_builds_;
}

AimOperator::AimOperator(const BasisSpace& space, const MediumParams& medium, const QuadratureRule& quad,
                         const AimParams& params, std::vector<int> group)
    : n_(static_cast<Eigen::Index>(space.dof_count())), medium_(medium), group_(std::move(group)) {
  auto t0 = std::chrono::steady_clock::now();
  if (!group_.empty() && static_cast<Eigen::Index>(group_.size()) != n_)
    throw DimensionError("AIM group vector length does not match the space");
  const TriangleMesh& mesh = space.support_mesh();
  grid_ = build_grid(mesh.bbox_min(), mesh.bbox_max(), params, medium);
  proj_ = build_projection(grid_, space, params.projection_points);
  build_kernel();

  // Functions grouped by stencil base; near cell pairs are handled as blocks.
  std::map<std::array<int, 3>, std::vector<int>> cells;
  for (Eigen::Index n = 0; n < n_; ++n) {
    const auto& b = proj_.base[n];
    cells[{b[0], b[1], b[2]}].push_back(static_cast<int>(n));
  }
  std::vector<std::array<int, 3>> keys;
  std::vector<const std::vector<int>*> members;
  std::vector<std::vector<int>> cell_groups;
  for (const auto& [k, v] : cells) {
    keys.push_back(k);
    members.push_back(&v);
    std::vector<int> g;
    if (!group_.empty())
      for (int f : v) g.push_back(group_[f]);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    cell_groups.push_back(std::move(g));
  }
  const int o = grid_.order;
  const int sp = stencil_points(o);
  const int reach = o + grid_.near_stencils;
  // Dense local weights per function: rows psi, columns stencil points.
  std::vector<RMatrix> local(n_, RMatrix::Zero(4, sp));
  for (int psi = 0; psi < 4; ++psi)
    for (Eigen::Index n = 0; n < n_; ++n)
      for (RSparse::InnerIterator it(proj_.p[psi], n); it; ++it) {
        Eigen::Index g = it.row();
        int k = static_cast<int>(g % grid_.counts[2]);
        int j = static_cast<int>((g / grid_.counts[2]) % grid_.counts[1]);
        int i = static_cast<int>(g / (Eigen::Index(grid_.counts[2]) * grid_.counts[1]));
        const auto& b = proj_.base[n];
        local[n](psi, ((i - b[0]) * (o + 1) + (j - b[1])) * (o + 1) + (k - b[2])) = it.value();
      }
  const Complex jwmu(0.0, medium.omega * medium.mu0);
  const double inv_k2 = 1.0 / (medium.k0 * medium.k0);
  std::vector<std::pair<int, int>> pairs;
  std::vector<Complex> grid_vals;
  CMatrix gblk(sp, sp);
  for (std::size_t a = 0; a < keys.size(); ++a) {
    for (std::size_t b = 0; b < keys.size(); ++b) {
      int dist = 0;
      for (int x = 0; x < 3; ++x) dist = std::max(dist, std::abs(keys[a][x] - keys[b][x]));
      bool cell_near = dist <= reach;
      bool shared = false;
      if (!cell_near) {
        std::vector<int> common;
        std::set_intersection(cell_groups[a].begin(), cell_groups[a].end(), cell_groups[b].begin(),
                              cell_groups[b].end(), std::back_inserter(common));
        shared = !common.empty();
      }
      if (!cell_near && !shared) continue;
      Eigen::Vector3i d0(keys[b][0] - keys[a][0], keys[b][1] - keys[a][1], keys[b][2] - keys[a][2]);
      int p = 0;
      for (int i = 0; i <= o; ++i)
        for (int j = 0; j <= o; ++j)
          for (int k = 0; k <= o; ++k, ++p) {
            int q = 0;
            for (int i2 = 0; i2 <= o; ++i2)
              for (int j2 = 0; j2 <= o; ++j2)
                for (int k2 = 0; k2 <= o; ++k2, ++q)
                  gblk(p, q) = kernel_sample(d0 + Eigen::Vector3i(i2 - i, j2 - j, k2 - k));
          }
      const auto& ma = *members[a];
      const auto& mb = *members[b];
      CMatrix blk = CMatrix::Zero(ma.size(), mb.size());
      CMatrix wa(ma.size(), sp), wb(mb.size(), sp);
      for (int psi = 0; psi < 4; ++psi) {
        for (std::size_t i = 0; i < ma.size(); ++i) wa.row(i) = local[ma[i]].row(psi).cast<Complex>();
        for (std::size_t i = 0; i < mb.size(); ++i) wb.row(i) = local[mb[i]].row(psi).cast<Complex>();
        CMatrix v = (wa * gblk) * wb.transpose();
        blk += psi < 3 ? v : CMatrix(-inv_k2 * v);
      }
      for (std::size_t i = 0; i < ma.size(); ++i)
        for (std::size_t j = 0; j < mb.size(); ++j) {
          if (!cell_near && group_[ma[i]] != group_[mb[j]]) continue;
          pairs.emplace_back(ma[i], mb[j]);
          grid_vals.push_back(jwmu * blk(i, j));
        }
    }
  }
  std::vector<Complex> exact = assemble_L_entries(space, space, pairs, medium, quad);
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    trip.emplace_back(pairs[i].first, pairs[i].second, exact[i] - grid_vals[i]);
  near_.resize(n_, n_);
  near_.setFromTriplets(trip.begin(), trip.end());
  build_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool AimOperator::is_near(int m, int n) const {
  if (!group_.empty() && group_[m] == group_[n]) return true;
  return (proj_.base[m] - proj_.base[n]).cwiseAbs().maxCoeff() <= grid_.order + grid_.near_stencils;
}

Complex AimOperator::grid_entry(int m, int n) const {
  const Complex jwmu(0.0, medium_.omega * medium_.mu0);
  const double inv_k2 = 1.0 / (medium_.k0 * medium_.k0);
  auto coords = [&](Eigen::Index g) {
    return Eigen::Vector3i(static_cast<int>(g / (Eigen::Index(grid_.counts[2]) * grid_.counts[1])),
                           static_cast<int>((g / grid_.counts[2]) % grid_.counts[1]),
                           static_cast<int>(g % grid_.counts[2]));
  };
  Complex acc = 0.0;
  for (int psi = 0; psi < 4; ++psi) {
    Complex v = 0.0;
    for (RSparse::InnerIterator a(proj_.p[psi], m); a; ++a)
      for (RSparse::InnerIterator b(proj_.p[psi], n); b; ++b)
        v += a.value() * b.value() * kernel_sample(coords(b.row()) - coords(a.row()));
    acc += psi < 3 ? v : -inv_k2 * v;
  }
  return jwmu * acc;
}

CVector AimOperator::apply_far(const CVector& x) const {
  if (x.size() != n_) throw DimensionError("AIM matvec: expected length " + std::to_string(n_));
  const Eigen::Vector3i& c = grid_.counts;
  const std::size_t total = static_cast<std::size_t>(padded_.prod());
  const Complex jwmu(0.0, medium_.omega * medium_.mu0);
  const double inv_k2 = 1.0 / (medium_.k0 * medium_.k0);
  std::array<CVector, 4> parts;
#pragma omp parallel for schedule(static)
  for (int psi = 0; psi < 4; ++psi) {
    fftw_complex* raw = fftw_alloc_complex(total);
    Complex* buf = reinterpret_cast<Complex*>(raw);
    std::fill(buf, buf + total, Complex(0.0, 0.0));
    auto slot = [&](Eigen::Index g) {
      Eigen::Index k = g % c[2];
      Eigen::Index j = (g / c[2]) % c[1];
      Eigen::Index i = g / (Eigen::Index(c[2]) * c[1]);
      return static_cast<std::size_t>((i * padded_[1] + j) * padded_[2] + k);
    };
    const RSparse& p = proj_.p[psi];
    for (Eigen::Index n = 0; n < n_; ++n)
      for (RSparse::InnerIterator it(p, n); it; ++it) buf[slot(it.row())] += it.value() * x[n];
    fftw_execute_dft(fft_->forward, raw, raw);
    for (std::size_t i = 0; i < total; ++i) buf[i] *= kernel_fft_[i];
    fftw_execute_dft(fft_->backward, raw, raw);
    CVector out = CVector::Zero(n_);
    for (Eigen::Index n = 0; n < n_; ++n) {
      Complex acc = 0.0;
      for (RSparse::InnerIterator it(p, n); it; ++it) acc += it.value() * buf[slot(it.row())];
      out[n] = acc;
    }
    fftw_free(raw);
    parts[psi] = psi < 3 ? CVector(jwmu * out) : CVector(-jwmu * inv_k2 * out);
  }
  return parts[0] + parts[1] + parts[2] + parts[3];
}

CVector AimOperator::apply(const CVector& x) const {
  CVector y = apply_far(x);
  y += near_ * x;
  return y;
}

std::size_t AimOperator::storage_bytes() const {
  std::size_t bytes = 0;
  for (const auto& p : proj_.p) bytes += static_cast<std::size_t>(p.nonZeros()) * (sizeof(double) + sizeof(int));
  bytes += (kernel_.size() + kernel_fft_.size()) * sizeof(Complex);
  bytes += static_cast<std::size_t>(near_.nonZeros()) * (sizeof(Complex) + sizeof(int));
  return bytes;
}

CouplingFactory aim_coupling(const MediumParams& medium, const QuadratureRule& quad, const AimParams& params) {
  return [=](const BasisSpace& space, const std::vector<int>& group) -> std::unique_ptr<LinearOperator> {
    return std::make_unique<AimOperator>(space, medium, quad, params, group);
  };
}

}  // namespace mmsie
