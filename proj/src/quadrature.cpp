#include "mmsie/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "mmsie/types.hpp"

namespace mmsie {

namespace {

void add_perm3(std::vector<TriPoint>& rule, double a, double b, double c, double w) {
  // All distinct permutations of (a, b, c).
  std::array<std::array<double, 3>, 6> perms = {{{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}}};
  std::vector<std::array<double, 3>> seen;
  for (const auto& p : perms) {
    bool dup = false;
    for (const auto& s : seen) {
      if (s == p) dup = true;
    }
    if (!dup) {
      seen.push_back(p);
      rule.push_back({p, w});
    }
  }
}

std::vector<TriPoint> make_rule(int npoints) {
  std::vector<TriPoint> r;
  switch (npoints) {
    case 1:
      r.push_back({{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0});
      break;
    case 3:
      add_perm3(r, 2.0 / 3, 1.0 / 6, 1.0 / 6, 1.0 / 3);
      break;
    case 4:
      r.push_back({{1.0 / 3, 1.0 / 3, 1.0 / 3}, -27.0 / 48});
      add_perm3(r, 0.6, 0.2, 0.2, 25.0 / 48);
      break;
    case 6:
      add_perm3(r, 0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011);
      add_perm3(r, 0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322);
      break;
    case 7:
      r.push_back({{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.225});
      add_perm3(r, 0.059715871789770, 0.470142064105115, 0.470142064105115, 0.132394152788506);
      add_perm3(r, 0.797426985353087, 0.101286507323456, 0.101286507323456, 0.125939180544827);
      break;
    case 12:
      add_perm3(r, 0.501426509658179, 0.249286745170910, 0.249286745170910, 0.116786275726379);
      add_perm3(r, 0.873821971016996, 0.063089014491502, 0.063089014491502, 0.050844906370207);
      add_perm3(r, 0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374);
      break;
    default:
      throw Error("unsupported triangle rule size " + std::to_string(npoints));
  }
  return r;
}

std::vector<LinePoint> make_gauss(int n) {
  std::vector<LinePoint> out(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double pn = p1, pm = p0;
      dp = n * (x * pn - pm) / (x * x - 1.0);
      double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    out[n - 1 - i] = {0.5 * (x + 1.0), 0.5 * w};
  }
  return out;
}

// Regions in the reference coordinates 0 <= x2 <= x1 <= 1 of HLIB-style
// formulas; converted to (a1, a2) = (x1 - x2, x2) afterwards.
std::vector<PairPoint> make_ss(Adjacency adj, int n) {
  const auto& g = gauss_legendre01(n);
  std::vector<PairPoint> out;
  auto push = [&](double x1, double x2, double y1, double y2, double w) {
    out.push_back({x1 - x2, x2, y1 - y2, y2, w});
  };
  if (adj == Adjacency::kNone) {
    for (const auto& a : g)
      for (const auto& b : g)
        for (const auto& c : g)
          for (const auto& d : g) {
            double xi = a.x, e1 = b.x, e2 = c.x, e3 = d.x;
            double w = a.weight * b.weight * c.weight * d.weight * xi * e2;
            push(xi, xi * e1, e2, e2 * e3, w);
          }
    return out;
  }
  for (const auto& a : g)
    for (const auto& b : g)
      for (const auto& c : g)
        for (const auto& d : g) {
          double xi = a.x, e1 = b.x, e2 = c.x, e3 = d.x;
          double w = a.weight * b.weight * c.weight * d.weight;
          double xi3 = xi * xi * xi;
          switch (adj) {
            case Adjacency::kCoincident: {
              double lw = w * xi3 * e1 * e1 * e2;
              double ax = xi, ay = xi * (1 - e1 + e1 * e2);
              double bx = xi * (1 - e1 * e2 * e3), by = xi * (1 - e1);
              push(ax, ay, bx, by, lw);
              push(bx, by, ax, ay, lw);
              ax = xi;
              ay = xi * e1 * (1 - e2 + e2 * e3);
              bx = xi * (1 - e1 * e2);
              by = xi * e1 * (1 - e2);
              push(ax, ay, bx, by, lw);
              push(bx, by, ax, ay, lw);
              ax = xi * (1 - e1 * e2 * e3);
              ay = xi * e1 * (1 - e2 * e3);
              bx = xi;
              by = xi * e1 * (1 - e2);
              push(ax, ay, bx, by, lw);
              push(bx, by, ax, ay, lw);
              break;
            }
            case Adjacency::kEdge: {
              double lw1 = w * xi3 * e1 * e1;
              double lw = lw1 * e2;
              push(xi, xi * e1 * e3, xi * (1 - e1 * e2), xi * e1 * (1 - e2), lw1);
              push(xi, xi * e1, xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3), lw);
              push(xi * (1 - e1 * e2), xi * e1 * (1 - e2), xi, xi * e1 * e2 * e3, lw);
              push(xi * (1 - e1 * e2 * e3), xi * e1 * e2 * (1 - e3), xi, xi * e1, lw);
              push(xi * (1 - e1 * e2 * e3), xi * e1 * (1 - e2 * e3), xi, xi * e1 * e2, lw);
              break;
            }
            case Adjacency::kVertex: {
              double lw = w * xi3 * e2;
              push(xi, xi * e1, xi * e2, xi * e2 * e3, lw);
              push(xi * e2, xi * e2 * e3, xi, xi * e1, lw);
              break;
            }
            default:
              break;
          }
        }
  return out;
}

std::recursive_mutex g_mutex;

}  // namespace

bool is_supported_point_count(int npoints) {
  return npoints == 1 || npoints == 3 || npoints == 4 || npoints == 6 || npoints == 7 || npoints == 12;
}

const std::vector<TriPoint>& triangle_rule_by_points(int npoints) {
  static std::map<int, std::vector<TriPoint>> cache;
  std::lock_guard<std::recursive_mutex> lock(g_mutex);
  auto it = cache.find(npoints);
  if (it == cache.end()) it = cache.emplace(npoints, make_rule(npoints)).first;
  return it->second;
}

const std::vector<TriPoint>& dunavant(int degree) {
  static const int points[] = {1, 1, 3, 4, 6, 7, 12};
  if (degree < 0 || degree > 6) throw Error("unsupported Dunavant degree " + std::to_string(degree));
  return triangle_rule_by_points(points[degree]);
}

const std::vector<LinePoint>& gauss_legendre01(int n) {
  static std::map<int, std::vector<LinePoint>> cache;
  if (n < 1) throw Error("Gauss-Legendre order must be positive");
  std::lock_guard<std::recursive_mutex> lock(g_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss(n)).first;
  return it->second;
}

const std::vector<PairPoint>& sauter_schwab(Adjacency adjacency, int n) {
  static std::map<std::pair<int, int>, std::vector<PairPoint>> cache;
  std::lock_guard<std::recursive_mutex> lock(g_mutex);
  auto key = std::make_pair(static_cast<int>(adjacency), n);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, make_ss(adjacency, n)).first;
  return it->second;
}

}  // namespace mmsie
