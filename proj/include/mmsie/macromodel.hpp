#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>

#include "mmsie/basis.hpp"
#include "mmsie/kernels.hpp"
#include "mmsie/linalg.hpp"
#include "mmsie/mesh.hpp"

namespace mmsie {

// Function spaces of one element. The split equivalent-surface RWG space and
// the dual space share the refined mesh, so touching pairs are detected.
struct ElementSpaces {
  BasisSpace scatterer;   // RWG on S
  BasisSpace equivalent;  // RWG on S^
  BasisSpace split;       // RWG on S^ expressed on the refinement
  BasisSpace dual;        // BC functions on S^
};
ElementSpaces build_element_spaces(const TriangleMesh& scatterer, const TriangleMesh& equivalent);

// Blocks of the element equations
//   G_ej J + G_eh H^ + G_ee E^ = -v      (tested on S)
//   Gh_ej J + Gh_eh H^ + Gh_ee E^ = 0    (tested on S^)
// with G_ej = -Z(S, S), G_eh = -Z(S, S^), Gh_ej = -Z(S^, S), Gh_eh = -Z(S^, S^),
// G_ee = K(S, dual), Gh_ee = K(S^, dual) + D / 2 and D the RWG/dual Gram matrix.
struct ElementMatrices {
  CMatrix g_ej, g_eh, g_ee;
  CMatrix gh_ej, gh_eh, gh_ee;
  RSparse d;
};
ElementMatrices build_element_matrices(const ElementSpaces& spaces, const MediumParams& medium,
                                       const QuadratureRule& quad);
ElementMatrices build_element_matrices(const ElementGeometry& elem, const MediumParams& medium,
                                       const QuadratureRule& quad);

struct Macromodel {
  std::uint64_t shape_id = 0;
  double frequency_hz = 0.0;
  Eigen::Index n = 0;      // scatterer DoF
  Eigen::Index n_hat = 0;  // equivalent-surface DoF
  CMatrix t;               // n_hat x n, J^ = T J
  DenseLu a;               // A = G_ej - G_eh Gh_eh^-1 Gh_ej
  CMatrix b;               // n x n_hat, B = G_ee - G_eh Gh_eh^-1 Gh_ee
  DenseLu gh_eh;
  RSparse d;
  // Self block of the reduced operator, D - Gh_ej A^-1 B (block-Jacobi).
  DenseLu block;
  bool block_ok = false;
  double build_seconds = 0.0;

  // J = -A^-1 (B E^ + v); v may be empty.
  CVector recover_current(const CVector& e_hat, const CVector& v = CVector()) const;
  CVector equivalent_current(const CVector& j) const;
};

Macromodel build_macromodel(const ElementMatrices& m, std::uint64_t shape_id, double frequency_hz);
Macromodel build_macromodel(const ElementGeometry& elem, const MediumParams& medium, const QuadratureRule& quad);

void save_macromodel(std::ostream& out, const Macromodel& model);
Macromodel load_macromodel(std::istream& in);
void save_macromodel(const std::string& path, const Macromodel& model);
Macromodel load_macromodel(const std::string& path);

class MacromodelCache {
 public:
  explicit MacromodelCache(bool enabled = true) : enabled_(enabled) {}

  std::shared_ptr<const Macromodel> get(const ElementGeometry& elem, const MediumParams& medium,
                                        const QuadratureRule& quad);
  void insert(std::shared_ptr<const Macromodel> model);

  int builds() const { return builds_; }
  int hits() const { return hits_; }
  std::size_t size() const { return models_.size(); }
  double build_seconds() const { return seconds_; }

 private:
  bool enabled_;
  std::mutex mutex_;
  std::map<std::uint64_t, std::shared_ptr<const Macromodel>> models_;
  int builds_ = 0;
  int hits_ = 0;
  double seconds_ = 0.0;
};

}  // namespace mmsie
