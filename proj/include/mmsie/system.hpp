#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "mmsie/excitation.hpp"
#include "mmsie/macromodel.hpp"

namespace mmsie {

struct ArrayProblem {
  std::vector<ElementGeometry> elements;
  MediumParams medium;
  Excitation excitation;
  QuadratureRule quad;
};

// Pairwise checks: equivalent surfaces must not overlap or touch.
void check_disjoint(const std::vector<ElementGeometry>& elements);

// Mirror image of an element across z = plane_z (numbering preserved).
ElementGeometry mirror_element(const ElementGeometry& elem, double plane_z);

// Union of world-space meshes, numbered element by element.
TriangleMesh union_scatterers(const std::vector<ElementGeometry>& elements);
TriangleMesh union_equivalents(const std::vector<ElementGeometry>& elements);

// Linear map on complex vectors.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index size() const = 0;
  virtual CVector apply(const CVector& x) const = 0;
};

class DenseOperator : public LinearOperator {
 public:
  explicit DenseOperator(CMatrix m) : m_(std::move(m)) {}
  Eigen::Index size() const override { return m_.rows(); }
  CVector apply(const CVector& x) const override;
  const CMatrix& matrix() const { return m_; }

 private:
  CMatrix m_;
};

// Builds the Z operator on the equivalent union space; group[n] is the element
// of function n.
using CouplingFactory = std::function<std::unique_ptr<LinearOperator>(const BasisSpace&, const std::vector<int>&)>;

struct DirectSystem {
  std::shared_ptr<const TriangleMesh> mesh;
  BasisSpace space;
  // Image currents live on image_space with coefficients -J.
  std::shared_ptr<const BasisSpace> image_space;
  CMatrix z;
  CVector rhs;
  std::vector<Eigen::Index> offsets;  // first DoF of each element
  double fill_seconds = 0.0;
};

DirectSystem assemble_direct(const ArrayProblem& problem);

// (D - G T A^-1 B) E^ = V^ with G = -Z over the union of equivalent surfaces.
class ReducedSystem : public LinearOperator {
 public:
  Eigen::Index size() const override { return n_hat_; }
  CVector apply(const CVector& y) const override;
  // Block-Jacobi preconditioner (identity on blocks whose LU failed).
  CVector precondition(const CVector& y) const;

  const CVector& rhs() const { return rhs_; }
  Eigen::Index scatterer_unknowns() const { return n_; }
  int failed_blocks() const { return failed_blocks_; }

  // Scatterer currents for all elements, concatenated in element order.
  CVector recover_currents(const CVector& e_hat) const;
  CVector equivalent_currents(const CVector& j) const;

  const BasisSpace& equivalent_space() const { return *eq_space_; }
  const std::vector<std::shared_ptr<const Macromodel>>& models() const { return models_; }
  const std::vector<Eigen::Index>& offsets() const { return offsets_; }
  const std::vector<Eigen::Index>& offsets_hat() const { return offsets_hat_; }
  const LinearOperator& coupling() const { return *coupling_; }
  double fill_seconds() const { return fill_seconds_; }

 private:
  friend ReducedSystem assemble_reduced(const ArrayProblem&, MacromodelCache&, const CouplingFactory&);
  CVector apply_tab(const CVector& y) const;  // T A^-1 B y

  Eigen::Index n_ = 0, n_hat_ = 0;
  std::vector<std::shared_ptr<const Macromodel>> models_;
  std::vector<Eigen::Index> offsets_, offsets_hat_;
  std::shared_ptr<const BasisSpace> eq_space_;
  std::unique_ptr<LinearOperator> coupling_;  // applies Z (the L operator); G = -Z
  CVector rhs_;
  std::vector<CVector> feeds_;  // per element, empty when unfed
  int failed_blocks_ = 0;
  double fill_seconds_ = 0.0;
};

// Dense coupling: Z assembled over the whole equivalent-surface union.
std::unique_ptr<LinearOperator> dense_coupling(const BasisSpace& space, const MediumParams& medium,
                                               const QuadratureRule& quad);

// The default coupling is dense_coupling.
ReducedSystem assemble_reduced(const ArrayProblem& problem, MacromodelCache& cache,
                               const CouplingFactory& coupling_factory = nullptr);

}  // namespace mmsie
