#include "mmsie/postproc.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mmsie/quadrature.hpp"

namespace mmsie {

void CurrentSamples::append(const CurrentSamples& other) {
  r.insert(r.end(), other.r.begin(), other.r.end());
  jw.insert(jw.end(), other.jw.begin(), other.jw.end());
  qw.insert(qw.end(), other.qw.begin(), other.qw.end());
}

CurrentSamples sample_currents(const BasisSpace& space, const CVector& coefficients, int quad_points) {
  if (coefficients.size() != static_cast<Eigen::Index>(space.dof_count()))
    throw DimensionError("sample_currents: coefficient count does not match the space");
  const TriangleMesh& m = space.support_mesh();
  const auto& rule = triangle_rule_by_points(quad_points);
  CurrentSamples out;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const int ti = static_cast<int>(t);
    const auto& pieces = space.pieces(ti);
    if (pieces.empty()) continue;
    const Vec3 p[3] = {m.corner(ti, 0), m.corner(ti, 1), m.corner(ti, 2)};
    for (const auto& q : rule) {
      Vec3 r = q.bary[0] * p[0] + q.bary[1] * p[1] + q.bary[2] * p[2];
      CVec3 j = CVec3::Zero();
      Complex div = 0.0;
      for (const auto& pc : pieces) {
        Vec3 f = pc.c[0] * (r - p[0]) + pc.c[1] * (r - p[1]) + pc.c[2] * (r - p[2]);
        j += coefficients[pc.function] * f.cast<Complex>();
        div += coefficients[pc.function] * (2.0 * (pc.c[0] + pc.c[1] + pc.c[2]));
      }
      out.r.push_back(r);
      out.jw.push_back(j * (q.weight * m.area(ti)));
      out.qw.push_back(div * (q.weight * m.area(ti)));
    }
  }
  return out;
}

void add_image(CurrentSamples& s, double plane_z) {
  const std::size_t n = s.r.size();
  for (std::size_t i = 0; i < n; ++i) {
    s.r.emplace_back(s.r[i].x(), s.r[i].y(), 2.0 * plane_z - s.r[i].z());
    s.jw.emplace_back(-s.jw[i].x(), -s.jw[i].y(), s.jw[i].z());
    s.qw.push_back(-s.qw[i]);
  }
}

CurrentSamples point_current(const Vec3& position, const CVec3& moment) {
  CurrentSamples s;
  s.r.push_back(position);
  s.jw.push_back(moment);
  s.qw.push_back(0.0);  // far-field use only
  return s;
}

Vec3 direction(double theta, double phi) {
  return Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
}

CVec3 radiated_field(const CurrentSamples& src, const MediumParams& medium, const Vec3& r) {
  CVec3 a = CVec3::Zero(), grad = CVec3::Zero();
  for (std::size_t i = 0; i < src.r.size(); ++i) {
    a += green(r, src.r[i], medium.k0) * src.jw[i];
    grad += green_gradient(r, src.r[i], medium.k0) * src.qw[i];
  }
  return Complex(0.0, -medium.omega * medium.mu0) * a - Complex(0.0, 1.0 / (medium.omega * medium.eps0)) * grad;
}

CVec3 far_field_vector(const CurrentSamples& src, const MediumParams& medium, const Vec3& rhat) {
  const double k = medium.k0;
  CVec3 sum = CVec3::Zero();
  for (std::size_t i = 0; i < src.r.size(); ++i) {
    double ph = k * rhat.dot(src.r[i]);
    sum += Complex(std::cos(ph), std::sin(ph)) * src.jw[i];
  }
  const CVec3 u = rhat.cast<Complex>();
  CVec3 transverse = sum - bdot(u, sum) * u;
  return Complex(0.0, -medium.omega * medium.mu0 / (4.0 * kPi)) * transverse;
}

double intensity_integral(const CurrentSamples& src, const MediumParams& medium, bool upper_only, int n_theta,
                          int n_phi) {
  const auto& gl = gauss_legendre01(n_theta);
  const double lo = upper_only ? 0.0 : -1.0;
  std::vector<double> rings(n_theta, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_theta; ++i) {
    double ct = lo + (1.0 - lo) * gl[i].x;
    double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    double ring = 0.0;
    for (int p = 0; p < n_phi; ++p) {
      double phi = 2.0 * kPi * p / n_phi;
      Vec3 u(st * std::cos(phi), st * std::sin(phi), ct);
      ring += far_field_vector(src, medium, u).squaredNorm();
    }
    rings[i] = gl[i].weight * (1.0 - lo) * ring * (2.0 * kPi / n_phi);
  }
  // Summed in a fixed order so results do not depend on the thread count.
  double total = 0.0;
  for (double r : rings) total += r;
  return total;
}

FarFieldPattern far_field(const CurrentSamples& src, const MediumParams& medium,
                          const std::vector<std::pair<double, double>>& angles, bool upper_only) {
  FarFieldPattern out;
  out.frequency = medium.frequency;
  out.samples.resize(angles.size());
  const double norm = intensity_integral(src, medium, upper_only);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < angles.size(); ++i) {
    auto [theta, phi] = angles[i];
    Vec3 u = direction(theta, phi);
    Vec3 et(std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta));
    Vec3 ep(-std::sin(phi), std::cos(phi), 0.0);
    CVec3 f = far_field_vector(src, medium, u);
    FarFieldSample& s = out.samples[i];
    s.theta = theta;
    s.phi = phi;
    s.e_theta = bdot(et.cast<Complex>(), f);
    s.e_phi = bdot(ep.cast<Complex>(), f);
    double d = norm > 0.0 ? 4.0 * kPi * f.squaredNorm() / norm : 0.0;
    s.directivity_dbi = d > 0.0 ? 10.0 * std::log10(d) : -300.0;
  }
  return out;
}

std::vector<double> rcs_bistatic(const FarFieldPattern& pattern, Complex incident_amplitude) {
  const double e2 = std::norm(incident_amplitude);
  if (e2 == 0.0) throw Error("RCS needs a non-zero incident amplitude");
  std::vector<double> out;
  out.reserve(pattern.samples.size());
  for (const auto& s : pattern.samples) out.push_back(4.0 * kPi * (std::norm(s.e_theta) + std::norm(s.e_phi)) / e2);
  return out;
}

std::vector<std::pair<double, double>> cut_angles(double phi_deg, double step_deg) {
  if (!(step_deg > 0.0)) throw Error("cut step must be positive");
  std::vector<std::pair<double, double>> out;
  const int n = static_cast<int>(std::lround(180.0 / step_deg));
  const double deg = kPi / 180.0;
  for (int i = -n; i <= n; ++i) {
    double t = i * step_deg;
    if (t < 0.0)
      out.emplace_back(-t * deg, (phi_deg + 180.0) * deg);
    else
      out.emplace_back(t * deg, phi_deg * deg);
  }
  return out;
}

void write_cut_csv(const std::string& path, const FarFieldPattern& pattern) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path);
  f << "theta_deg,phi_deg,D_dBi,re_E_theta,im_E_theta,re_E_phi,im_E_phi\n";
  char line[256];
  const double deg = 180.0 / kPi;
  // Signed theta: samples on the phi + 180 half plane are written as -theta.
  double phi0 = pattern.samples.empty() ? 0.0 : pattern.samples.back().phi;
  for (const auto& s : pattern.samples) {
    bool back = std::abs(s.phi - phi0) > 1e-9 && s.theta > 0.0;
    double t = back ? -s.theta * deg : s.theta * deg;
    double p = (back ? s.phi - kPi : s.phi) * deg;
    std::snprintf(line, sizeof(line), "%.6f,%.6f,%.6f,%.9e,%.9e,%.9e,%.9e\n", t, p, s.directivity_dbi,
                  s.e_theta.real(), s.e_theta.imag(), s.e_phi.real(), s.e_phi.imag());
    f << line;
  }
  if (!f) throw Error("failed to write " + path);
}

}  // namespace mmsie
