#include "mmsie/system.hpp"

#include <chrono>

namespace mmsie {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool boxes_overlap(const TriangleMesh& a, const TriangleMesh& b, double pad) {
  Vec3 alo = a.bbox_min(), ahi = a.bbox_max(), blo = b.bbox_min(), bhi = b.bbox_max();
  for (int i = 0; i < 3; ++i)
    if (alo[i] > bhi[i] + pad || blo[i] > ahi[i] + pad) return false;
  return true;
}

std::vector<ElementGeometry> with_images(const ArrayProblem& p) {
  std::vector<ElementGeometry> out = p.elements;
  if (p.excitation.image_plane)
    for (const auto& e : p.elements) out.push_back(mirror_element(e, *p.excitation.image_plane));
  return out;
}

std::vector<Eigen::Index> rwg_offsets(const std::vector<ElementGeometry>& elements, Eigen::Index& total) {
  std::vector<Eigen::Index> off;
  total = 0;
  for (const auto& e : elements) {
    off.push_back(total);
    total += static_cast<Eigen::Index>(e.scatterer_mesh.num_interior_edges());
  }
  return off;
}

}  // namespace

void check_disjoint(const std::vector<ElementGeometry>& elements) {
  std::vector<TriangleMesh> eq;
  eq.reserve(elements.size());
  for (const auto& e : elements) eq.push_back(e.world_equivalent());
  for (std::size_t i = 0; i < eq.size(); ++i)
    for (std::size_t j = i + 1; j < eq.size(); ++j) {
      double scale = std::max((eq[i].bbox_max() - eq[i].bbox_min()).norm(), (eq[j].bbox_max() - eq[j].bbox_min()).norm());
      if (!boxes_overlap(eq[i], eq[j], 1e-9 * scale)) continue;
      auto fail = [&](const char* what) {
        throw GeometryError("equivalent surfaces of elements " + std::to_string(i) + " and " + std::to_string(j) + " " +
                            what);
      };
      for (int pass = 0; pass < 2; ++pass) {
        const TriangleMesh& a = pass == 0 ? eq[i] : eq[j];
        const TriangleMesh& b = pass == 0 ? eq[j] : eq[i];
        for (const auto& v : a.vertices()) {
          if (distance_to_mesh(b, v) < 1e-9 * scale) fail("touch");
          if (winding_number(b, v) > 0.5) fail("overlap");
        }
      }
    }
}

ElementGeometry mirror_element(const ElementGeometry& elem, double plane_z) {
  TriangleMesh ws = mirror_across_plane(elem.world_scatterer(), plane_z);
  TriangleMesh we = mirror_across_plane(elem.world_equivalent(), plane_z);
  ElementGeometry g;
  g.translation = elem.translation;
  g.translation.z() = 2.0 * plane_z - elem.translation.z();
  g.scatterer_mesh = ws.translated(-g.translation);
  g.equivalent_mesh = we.translated(-g.translation);
  g.shape_id = compute_shape_id(g.scatterer_mesh, g.equivalent_mesh);
  return g;
}

TriangleMesh union_scatterers(const std::vector<ElementGeometry>& elements) {
  std::vector<TriangleMesh> parts;
  for (const auto& e : elements) parts.push_back(e.world_scatterer());
  return concatenate(parts);
}

TriangleMesh union_equivalents(const std::vector<ElementGeometry>& elements) {
  std::vector<TriangleMesh> parts;
  for (const auto& e : elements) parts.push_back(e.world_equivalent());
  return concatenate(parts);
}

CVector DenseOperator::apply(const CVector& x) const {
  if (x.size() != m_.cols()) throw DimensionError("operator applied to a vector of the wrong length");
  return m_ * x;
}

DirectSystem assemble_direct(const ArrayProblem& p) {
  if (p.elements.empty()) throw Error("problem has no elements");
  p.excitation.validate();
  auto t0 = std::chrono::steady_clock::now();
  DirectSystem s;
  s.mesh = std::make_shared<const TriangleMesh>(union_scatterers(p.elements));
  s.space = build_rwg(s.mesh);
  Eigen::Index total = 0;
  s.offsets = rwg_offsets(p.elements, total);
  s.z = assemble_L(s.space, s.space, p.medium, p.quad);
  if (p.excitation.image_plane) {
    std::vector<ElementGeometry> img;
    for (const auto& e : p.elements) img.push_back(mirror_element(e, *p.excitation.image_plane));
    s.image_space = std::make_shared<const BasisSpace>(build_rwg(union_scatterers(img)));
    s.z -= assemble_L(s.space, *s.image_space, p.medium, p.quad);
  }
  s.rhs = project_rhs(p.excitation, s.space, p.medium, p.quad);
  if (const auto* g = std::get_if<DeltaGap>(&p.excitation.source)) {
    if (g->element < 0 || g->element >= static_cast<int>(p.elements.size()))
      throw Error("delta gap element index out of range");
    CVector v = delta_gap_vector(build_rwg(p.elements[g->element].scatterer_mesh), g->edge, g->voltage);
    s.rhs.segment(s.offsets[g->element], v.size()) += v;
  }
  s.fill_seconds = seconds_since(t0);
  return s;
}

std::unique_ptr<LinearOperator> dense_coupling(const BasisSpace& space, const MediumParams& medium,
                                               const QuadratureRule& quad) {
  return std::make_unique<DenseOperator>(assemble_L(space, space, medium, quad));
}

ReducedSystem assemble_reduced(const ArrayProblem& p, MacromodelCache& cache,
                               const CouplingFactory& factory) {
  if (p.elements.empty()) throw Error("problem has no elements");
  p.excitation.validate();
  auto t0 = std::chrono::steady_clock::now();
  std::vector<ElementGeometry> elems = with_images(p);
  check_disjoint(elems);
  ReducedSystem s;
  for (const auto& e : elems) {
    auto m = cache.get(e, p.medium, p.quad);
    s.offsets_.push_back(s.n_);
    s.offsets_hat_.push_back(s.n_hat_);
    s.n_ += m->n;
    s.n_hat_ += m->n_hat;
    if (!m->block_ok) ++s.failed_blocks_;
    s.models_.push_back(std::move(m));
  }
  auto t1 = std::chrono::steady_clock::now();
  s.eq_space_ = std::make_shared<const BasisSpace>(build_rwg(union_equivalents(elems)));
  if (static_cast<Eigen::Index>(s.eq_space_->dof_count()) != s.n_hat_)
    throw Error("equivalent-surface numbering mismatch");
  std::vector<int> group;
  for (std::size_t m = 0; m < s.models_.size(); ++m) group.insert(group.end(), s.models_[m]->n_hat, static_cast<int>(m));
  s.coupling_ = factory ? factory(*s.eq_space_, group) : dense_coupling(*s.eq_space_, p.medium, p.quad);
  s.rhs_ = -project_rhs(p.excitation, *s.eq_space_, p.medium, p.quad);
  s.feeds_.resize(elems.size());
  if (const auto* g = std::get_if<DeltaGap>(&p.excitation.source)) {
    if (g->element < 0 || g->element >= static_cast<int>(p.elements.size()))
      throw Error("delta gap element index out of range");
    const auto& e = elems[g->element];
    CVector v = delta_gap_vector(build_rwg(e.scatterer_mesh), g->edge, g->voltage);
    s.feeds_[g->element] = v;
    // Feed term: J^ = -T A^-1 (B E^ + v) moves G T A^-1 v to the right-hand side.
    const auto& m = *s.models_[g->element];
    CVector w = CVector::Zero(s.n_hat_);
    w.segment(s.offsets_hat_[g->element], m.n_hat) = m.t * m.a.solve(v);
    s.rhs_ -= s.coupling_->apply(w);
  }
  s.fill_seconds_ = seconds_since(t1);
  (void)t0;
  return s;
}

CVector ReducedSystem::apply_tab(const CVector& y) const {
  CVector out(n_hat_);
  for (std::size_t m = 0; m < models_.size(); ++m) {
    const Macromodel& mm = *models_[m];
    CVector yb = y.segment(offsets_hat_[m], mm.n_hat);
    out.segment(offsets_hat_[m], mm.n_hat) = mm.t * mm.a.solve(CVector(mm.b * yb));
  }
  return out;
}

CVector ReducedSystem::apply(const CVector& y) const {
  if (y.size() != n_hat_) throw DimensionError("reduced matvec: expected length " + std::to_string(n_hat_));
  CVector out(n_hat_);
  for (std::size_t m = 0; m < models_.size(); ++m) {
    const Macromodel& mm = *models_[m];
    out.segment(offsets_hat_[m], mm.n_hat) = mm.d.cast<Complex>() * y.segment(offsets_hat_[m], mm.n_hat);
  }
  // G = -Z, so D y - G (T A^-1 B y) = D y + Z (T A^-1 B y).
  out += coupling_->apply(apply_tab(y));
  return out;
}

CVector ReducedSystem::precondition(const CVector& y) const {
  if (y.size() != n_hat_) throw DimensionError("preconditioner: dimension mismatch");
  CVector out = y;
  for (std::size_t m = 0; m < models_.size(); ++m) {
    const Macromodel& mm = *models_[m];
    if (!mm.block_ok) continue;
    out.segment(offsets_hat_[m], mm.n_hat) = mm.block.solve(CVector(y.segment(offsets_hat_[m], mm.n_hat)));
  }
  return out;
}

CVector ReducedSystem::recover_currents(const CVector& e_hat) const {
  if (e_hat.size() != n_hat_) throw DimensionError("recover_currents: dimension mismatch");
  CVector j(n_);
  for (std::size_t m = 0; m < models_.size(); ++m) {
    const Macromodel& mm = *models_[m];
    j.segment(offsets_[m], mm.n) = mm.recover_current(e_hat.segment(offsets_hat_[m], mm.n_hat), feeds_[m]);
  }
  return j;
}

CVector ReducedSystem::equivalent_currents(const CVector& j) const {
  if (j.size() != n_) throw DimensionError("equivalent_currents: dimension mismatch");
  CVector out(n_hat_);
  for (std::size_t m = 0; m < models_.size(); ++m) {
    const Macromodel& mm = *models_[m];
    out.segment(offsets_hat_[m], mm.n_hat) = mm.equivalent_current(j.segment(offsets_[m], mm.n));
  }
  return out;
}

}  // namespace mmsie
