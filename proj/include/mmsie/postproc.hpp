#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmsie/basis.hpp"
#include "mmsie/kernels.hpp"

namespace mmsie {

// Surface current sampled at quadrature points: J(r_q) * weight_q * area,
// and the surface divergence with the same weight.
struct CurrentSamples {
  std::vector<Vec3> r;
  std::vector<CVec3> jw;
  std::vector<Complex> qw;

  void append(const CurrentSamples& other);
};

CurrentSamples sample_currents(const BasisSpace& space, const CVector& coefficients, int quad_points = 6);
// Adds the image currents -M J(M r) of a PEC plane z = plane_z.
void add_image(CurrentSamples& samples, double plane_z);
// Hertzian current element p (A m) at position.
CurrentSamples point_current(const Vec3& position, const CVec3& moment);

Vec3 direction(double theta, double phi);

// Field radiated by the samples at r (not on the surface):
// E = -j w mu sum G J w - j / (w eps) sum grad G (div J) w.
CVec3 radiated_field(const CurrentSamples& src, const MediumParams& medium, const Vec3& r);

// Far-field amplitude F = lim r e^{jkr} E(r) along rhat.
CVec3 far_field_vector(const CurrentSamples& src, const MediumParams& medium, const Vec3& rhat);

struct FarFieldSample {
  double theta = 0.0;  // rad
  double phi = 0.0;    // rad
  Complex e_theta, e_phi;
  double directivity_dbi = 0.0;
};

struct FarFieldPattern {
  double frequency = 0.0;
  std::vector<FarFieldSample> samples;
};

// Integral of |F|^2 over the sphere (the upper half space z > plane when
// upper_only). Product Gauss-Legendre in cos(theta), trapezoid in phi.
double intensity_integral(const CurrentSamples& src, const MediumParams& medium, bool upper_only = false,
                          int n_theta = 48, int n_phi = 96);

// Pattern at the given (theta, phi) pairs in radians. Directivity is
// 4 pi |F|^2 / intensity_integral; `upper_only` restricts the normalization
// to the half space above a ground plane.
FarFieldPattern far_field(const CurrentSamples& src, const MediumParams& medium,
                          const std::vector<std::pair<double, double>>& angles, bool upper_only = false);

// Bistatic RCS 4 pi |F|^2 / |E_inc|^2 per sample.
std::vector<double> rcs_bistatic(const FarFieldPattern& pattern, Complex incident_amplitude);

// Cut at fixed phi: theta from -180 to 180 degrees, negative theta meaning
// the half plane phi + 180.
std::vector<std::pair<double, double>> cut_angles(double phi_deg, double step_deg = 1.0);

void write_cut_csv(const std::string& path, const FarFieldPattern& pattern);

}  // namespace mmsie
