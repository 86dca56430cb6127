#pragma once

#include <array>
#include <vector>

namespace mmsie {

// Point on the reference triangle in barycentric form. Weights sum to 1.
struct TriPoint {
  std::array<double, 3> bary;
  double weight;
};

// Symmetric Dunavant rule exact to the given polynomial degree.
// Supported degrees: 1, 2, 3, 4, 5, 6 (degree 6 uses the 12-point rule).
const std::vector<TriPoint>& dunavant(int degree);

// Rule order names used in configuration: 1, 3, 4, 6, 7, 12 points.
const std::vector<TriPoint>& triangle_rule_by_points(int npoints);
bool is_supported_point_count(int npoints);

// Gauss-Legendre nodes and weights mapped to [0, 1].
struct LinePoint {
  double x;
  double weight;
};
const std::vector<LinePoint>& gauss_legendre01(int n);

// Sauter-Schwab rules for pairs of triangles sharing geometry.
// Each entry maps to a pair of points on the reference triangle
// {(a1, a2) : a1, a2 >= 0, a1 + a2 <= 1}; the point is a0*P0 + a1*P1 + a2*P2.
// Vertex orderings: common vertices come first and in matching order.
// Integral over T x T' = 4 A A' * sum(weight * f).
struct PairPoint {
  double x1, x2;  // test triangle (a1, a2)
  double y1, y2;  // source triangle (a1, a2)
  double weight;
};

enum class Adjacency { kNone = 0, kVertex = 1, kEdge = 2, kCoincident = 3 };

const std::vector<PairPoint>& sauter_schwab(Adjacency adjacency, int n);

}  // namespace mmsie
