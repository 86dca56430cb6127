#include <doctest.h>

#include <cmath>

#include "oracle.hpp"

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kC = 299792458.0;
}  // namespace

TEST_CASE("Mie: Rayleigh slope 4 at small ka") {
  double a = 1.0;
  auto f_of = [&](double ka) { return ka * kC / (2 * kPi * a); };
  double s1 = oracle::mie_backscatter(a, f_of(0.01));
  double s2 = oracle::mie_backscatter(a, f_of(0.1));
  double slope = std::log10(s2 / s1) / std::log10(10.0);
  CHECK(slope == doctest::Approx(4.0).epsilon(0.01));
  // PEC Rayleigh backscatter: 9 pi a^2 (ka)^4
  CHECK(s1 == doctest::Approx(9.0 * kPi * std::pow(0.01, 4)).epsilon(0.01));
}

TEST_CASE("Mie: geometric optics limit at ka = 20") {
  double a = 0.5;
  double f = 20.0 * kC / (2 * kPi * a);
  double s = oracle::mie_backscatter(a, f);
  CHECK(s / (kPi * a * a) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("Mie: term count grows like ka + 10") {
  std::vector<double> theta;
  for (int i = 0; i <= 180; ++i) theta.push_back(i);
  for (double ka : {1.0, 5.0, 10.0, 20.0, 40.0}) {
    double f = ka * kC / (2 * kPi);
    auto r = oracle::mie_pec_sphere(1.0, f, theta);
    CHECK(r.terms >= ka);
    CHECK(r.terms <= ka + 4.0 * std::cbrt(ka) + 12.0);
    // Forward and backward cuts coincide in both planes.
    CHECK(r.sigma_e_plane.front() == doctest::Approx(r.sigma_h_plane.front()).epsilon(1e-10));
    CHECK(r.sigma_e_plane.back() == doctest::Approx(r.sigma_h_plane.back()).epsilon(1e-10));
  }
  CHECK_THROWS(oracle::mie_pec_sphere(1.0, 60.0 * kC / (2 * kPi), theta));
}

TEST_CASE("Mie: optical theorem for a PEC sphere") {
  // Extinction from forward amplitude equals scattered power (no absorption).
  double a = 1.0, ka = 3.0;
  double f = ka * kC / (2 * kPi * a);
  std::vector<double> theta;
  const int n = 2000;
  for (int i = 0; i <= n; ++i) theta.push_back(180.0 * i / n);
  auto r = oracle::mie_pec_sphere(a, f, theta);
  double k = ka / a;
  double cext = 4 * kPi / (k * k) * r.s1[0].real();
  double csca = 0.0;
  for (int i = 0; i <= n; ++i) {
    double th = theta[i] * kPi / 180.0;
    double w = (i == 0 || i == n) ? 0.5 : 1.0;
    csca += w * (std::norm(r.s1[i]) + std::norm(r.s2[i])) * std::sin(th);
  }
  csca *= (kPi / n) * kPi / (k * k);
  CHECK(csca == doctest::Approx(cext).epsilon(1e-4));
}

TEST_CASE("Mie: ka = pi where sin(ka) vanishes") {
  // Frozen from an independent evaluation with library spherical Bessel functions.
  auto r = oracle::mie_pec_sphere(0.5, kC, {0.0, 180.0});
  CHECK(r.sigma_e_plane[0] == doctest::Approx(9.247939528135579).epsilon(1e-9));
  CHECK(r.sigma_e_plane[1] == doctest::Approx(0.5940779673541556).epsilon(1e-9));
}

TEST_CASE("adaptive oracle: constant kernel gives product of areas") {
  oracle::Tri t1 = {oracle::Vec3(0, 0, 0), oracle::Vec3(1, 0, 0), oracle::Vec3(0, 1, 0)};
  oracle::Tri t2 = {oracle::Vec3(0, 0, 1), oracle::Vec3(2, 0, 1), oracle::Vec3(0, 1, 1.5)};
  auto v = oracle::adaptive_integral(t1, t2, [](const oracle::Vec3&, const oracle::Vec3&) { return oracle::Complex(1.0); },
                                     1e-10);
  double a2 = 0.5 * (t2[1] - t2[0]).cross(t2[2] - t2[0]).norm();
  CHECK(v.real() == doctest::Approx(0.5 * a2).epsilon(1e-12));
}

TEST_CASE("adaptive oracle: 1/R self integral matches closed form") {
  oracle::Tri t = {oracle::Vec3(0, 0, 0), oracle::Vec3(1, 0, 0), oracle::Vec3(0, 1, 0)};
  auto k = [](const oracle::Vec3& x, const oracle::Vec3& y) { return oracle::Complex(1.0 / (x - y).norm()); };
  double closed = oracle::self_inverse_distance(t);
  auto v1 = oracle::adaptive_integral(t, t, k, 1e-4);
  CHECK(std::abs(v1.real() - closed) <= 1e-4 * closed);
  auto v2 = oracle::adaptive_integral(t, t, k, 1e-5);
  CHECK(std::abs(v2.real() - closed) <= 1e-7 * closed);
  CHECK(std::abs(v2 - v1) <= 1e-4 * closed);
  // Equilateral triangle: same closed form, different shape.
  oracle::Tri e = {oracle::Vec3(0, 0, 0), oracle::Vec3(1, 0, 0), oracle::Vec3(0.5, std::sqrt(3.0) / 2, 0)};
  CHECK(oracle::adaptive_integral(e, e, k, 1e-4).real() ==
        doctest::Approx(oracle::self_inverse_distance(e)).epsilon(1e-6));
}
