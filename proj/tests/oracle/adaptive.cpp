#include <cmath>
#include <stdexcept>
#include <vector>

#include "oracle.hpp"

namespace oracle {

namespace {

// 7-point Kronrod nodes on [-1, 1] with the embedded 3-point Gauss rule.
const double kXk[4] = {0.960491268708020283423507092629080, 0.774596669241483377035853079956480,
                       0.434243749346802558002071502844628, 0.0};
const double kWk[4] = {0.104656226026467265193823857192073, 0.268488089868333440728569280666710,
                       0.401397414775962222905051818618432, 0.450916538658474142345110087045571};
const double kWg[2] = {0.555555555555555555555555555555556, 0.888888888888888888888888888888889};

void gk7(const std::function<Complex(double)>& f, double a, double b, Complex& kr, Complex& gr) {
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  Complex fc = f(c);
  kr = fc * kWk[3];
  gr = fc * kWg[1];
  for (int i = 0; i < 3; ++i) {
    Complex f1 = f(c - h * kXk[i]), f2 = f(c + h * kXk[i]);
    kr += kWk[i] * (f1 + f2);
    if (i == 1) gr += kWg[0] * (f1 + f2);
  }
  kr *= h;
  gr *= h;
}

struct Budget {
  long left;
};

Complex recurse(const std::function<Complex(double)>& f, double a, double b, double tol, int depth, Budget& budget) {
  Complex k, g;
  gk7(f, a, b, k, g);
  if (--budget.left < 0) throw std::runtime_error("adaptive integration budget exhausted");
  if (std::abs(k - g) <= tol || depth > 60) return k;
  double m = 0.5 * (a + b);
  return recurse(f, a, m, 0.5 * tol, depth + 1, budget) + recurse(f, m, b, 0.5 * tol, depth + 1, budget);
}

Vec3 unit_normal(const Tri& t) { return (t[1] - t[0]).cross(t[2] - t[0]).normalized(); }

}  // namespace

Complex adaptive_1d(const std::function<Complex(double)>& f, double a, double b, double rel_tol, double abs_tol) {
  Complex k, g;
  gk7(f, a, b, k, g);
  double tol = std::max(abs_tol, rel_tol * std::abs(k));
  if (tol >= 1e29) return k;
  Budget budget{1000000};
  return recurse(f, a, b, tol, 0, budget);
}

Complex triangle_integral(const Tri& tri, const std::function<Complex(const Vec3&)>& f, double rel_tol,
                          double abs_tol) {
  // Duffy map x = P0 + u (P1 - P0) + u v (P2 - P1), dS = 2A u du dv.
  double area2 = (tri[1] - tri[0]).cross(tri[2] - tri[0]).norm();
  double a = abs_tol / area2;
  auto outer = [&](double u) {
    auto inner = [&](double v) { return f(tri[0] + u * (tri[1] - tri[0]) + u * v * (tri[2] - tri[1])); };
    return u * adaptive_1d(inner, 0.0, 1.0, rel_tol, a);
  };
  return area2 * adaptive_1d(outer, 0.0, 1.0, rel_tol, a);
}

Complex triangle_integral_polar(const Tri& tri, const Vec3& center, const std::function<Complex(const Vec3&)>& f,
                                double rel_tol) {
  Vec3 n = unit_normal(tri);
  Vec3 rho = center - n.dot(center - tri[0]) * n;
  double scale = std::max({(tri[1] - tri[0]).norm(), (tri[2] - tri[1]).norm(), (tri[0] - tri[2]).norm()});
  struct Sub {
    double s, alpha, h, phi0;
    Vec3 e1, e2;
  };
  std::vector<Sub> subs;
  for (int i = 0; i < 3; ++i) {
    Vec3 a = tri[i] - rho, b = tri[(i + 1) % 3] - rho;
    Vec3 edge = b - a;
    Vec3 foot = a - edge * (a.dot(edge) / edge.squaredNorm());
    double h = foot.norm();
    // rho on (or numerically on) this edge line: the sub-triangle has no area.
    if (h < 1e-12 * scale) continue;
    double sign = n.dot(a.cross(b));
    Sub sub;
    sub.s = sign > 0 ? 1.0 : -1.0;
    sub.e1 = a.normalized();
    sub.e2 = (sub.s * n).cross(sub.e1);
    sub.alpha = std::atan2(b.dot(sub.e2), b.dot(sub.e1));
    sub.h = h;
    sub.phi0 = std::atan2(foot.dot(sub.e2), foot.dot(sub.e1));
    subs.push_back(sub);
  }
  auto angular = [&](const Sub& sub, double theta, double tol) {
    double rmax = sub.h / std::cos(theta - sub.phi0);
    Vec3 dir = std::cos(theta) * sub.e1 + std::sin(theta) * sub.e2;
    auto radial = [&](double r) { return r * f(rho + r * dir); };
    return adaptive_1d(radial, 0.0, rmax, 0.0, tol);
  };
  // Coarse pass fixes an absolute tolerance for the accurate pass.
  double magnitude = 0.0;
  for (const auto& sub : subs)
    magnitude += std::abs(adaptive_1d([&](double t) { return angular(sub, t, 1e30); }, 0.0, sub.alpha, 1e30, 1e30));
  if (magnitude == 0.0) return 0.0;
  double tol = rel_tol * magnitude;
  Complex total = 0.0;
  for (const auto& sub : subs) {
    double radial_tol = tol / std::max(std::abs(sub.alpha), 1e-3);
    total += sub.s * adaptive_1d([&](double t) { return angular(sub, t, radial_tol); }, 0.0, sub.alpha, 0.0, tol / 3.0);
  }
  return total;
}

Complex adaptive_integral(const Tri& tri_test, const Tri& tri_src,
                          const std::function<Complex(const Vec3&, const Vec3&)>& kernel, double tol) {
  auto inner = [&](const Vec3& x) {
    return triangle_integral_polar(tri_src, x, [&](const Vec3& y) { return kernel(x, y); }, tol);
  };
  return triangle_integral(tri_test, inner, tol);
}

double self_inverse_distance(const Tri& tri) {
  double a = (tri[1] - tri[2]).norm();
  double b = (tri[2] - tri[0]).norm();
  double c = (tri[0] - tri[1]).norm();
  double area = 0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]).norm();
  auto term = [](double p, double q, double r) {
    return std::log(((p + q) * (p + q) - r * r) / (q * q - (r - p) * (r - p))) / p;
  };
  return 4.0 * area * area / 3.0 * (term(a, b, c) + term(b, c, a) + term(c, a, b));
}

}  // namespace oracle
