#include "mmsie/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

namespace mmsie {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  char b[64];
  std::snprintf(b, sizeof(b), "%.9g", v);
  return b;
}

// Per-element LU of the diagonal blocks of the direct matrix.
class DirectBlockJacobi {
 public:
  DirectBlockJacobi(const CMatrix& z, const std::vector<Eigen::Index>& offsets) : offsets_(offsets) {
    offsets_.push_back(z.rows());
    for (std::size_t m = 0; m + 1 < offsets_.size(); ++m) {
      Eigen::Index n = offsets_[m + 1] - offsets_[m];
      blocks_.emplace_back(z.block(offsets_[m], offsets_[m], n, n));
    }
  }
  CVector operator()(const CVector& y) const {
    CVector out(y.size());
    for (std::size_t m = 0; m < blocks_.size(); ++m) {
      Eigen::Index n = offsets_[m + 1] - offsets_[m];
      out.segment(offsets_[m], n) = blocks_[m].solve(CVector(y.segment(offsets_[m], n)));
    }
    return out;
  }

 private:
  std::vector<Eigen::Index> offsets_;
  std::vector<Eigen::PartialPivLU<CMatrix>> blocks_;
};

}  // namespace

std::string RunResult::value(const std::string& key) const {
  for (const auto& [k, v] : report)
    if (k == key) return v;
  throw Error("report has no key '" + key + "'");
}

ArrayProblem build_problem(const RunConfig& c) {
  ArrayProblem p;
  p.medium = MediumParams::at(c.frequency_hz);
  p.excitation = c.excitation;
  p.quad = c.quad;
  for (const auto& pl : c.placements) {
    const ElementTemplate& t = c.library.at(pl.element);
    p.elements.push_back(make_element(t.scatterer, t.equivalent, pl.position));
  }
  return p;
}

RunResult run(const RunConfig& c) {
  RunResult r;
  auto t_all = Clock::now();
  ArrayProblem problem = build_problem(c);
  check_disjoint(problem.elements);
  const MediumParams& med = problem.medium;
  const bool direct = c.formulation == Formulation::kDirect;
  const bool precond = c.solver.preconditioner == PreconditionerKind::kBlockJacobi;
  auto add = [&](const std::string& k, const std::string& v) { r.report.emplace_back(k, v); };

  add("method", direct ? "direct" : (c.coupling == CouplingKind::kAim ? "macromodel-aim" : "macromodel-dense"));
  add("frequency_hz", fmt(c.frequency_hz));
  add("elements", std::to_string(problem.elements.size()));

  BasisSpace scatterers = build_rwg(union_scatterers(problem.elements));
  r.scatterer_unknowns = static_cast<Eigen::Index>(scatterers.dof_count());
  std::size_t memory = 0;
  const DeltaGap* gap = std::get_if<DeltaGap>(&c.excitation.source);
  std::vector<Eigen::Index> offsets;

  if (direct) {
    auto t0 = Clock::now();
    DirectSystem sys = assemble_direct(problem);
    r.timing.emplace_back("matrix_fill_s", since(t0));
    r.solved_unknowns = sys.z.rows();
    offsets = sys.offsets;
    memory = static_cast<std::size_t>(sys.z.size()) * sizeof(Complex);
    t0 = Clock::now();
    std::unique_ptr<DirectBlockJacobi> bj;
    if (precond) bj = std::make_unique<DirectBlockJacobi>(sys.z, sys.offsets);
    r.timing.emplace_back("preconditioner_s", since(t0));
    DenseOperator op(sys.z);
    t0 = Clock::now();
    r.solve = gmres(op, sys.rhs, c.solver, bj ? VectorMap([&](const CVector& y) { return (*bj)(y); }) : nullptr);
    r.timing.emplace_back("solve_s", since(t0));
    r.currents = r.solve.solution;
    if (c.estimate_condition) r.condition = estimate_condition(op);
  } else {
    MacromodelCache cache(c.cache);
    CouplingFactory factory;
    if (c.coupling == CouplingKind::kAim) factory = aim_coupling(med, c.quad, c.aim);
    auto t0 = Clock::now();
    ReducedSystem sys = assemble_reduced(problem, cache, factory);
    r.timing.emplace_back("macromodel_s", cache.build_seconds());
    r.timing.emplace_back("matrix_fill_s", sys.fill_seconds());
    r.timing.emplace_back("assembly_total_s", since(t0));
    r.solved_unknowns = sys.size();
    offsets = sys.offsets();
    add("macromodel_builds", std::to_string(cache.builds()));
    add("macromodel_cache_hits", std::to_string(cache.hits()));
    add("failed_preconditioner_blocks", std::to_string(sys.failed_blocks()));
    std::set<const Macromodel*> unique;
    for (const auto& m : sys.models()) unique.insert(m.get());
    for (const Macromodel* m : unique)
      memory += static_cast<std::size_t>(m->t.size() + m->a.factors().size() + m->b.size() + m->gh_eh.factors().size() +
                                         m->block.factors().size()) *
                sizeof(Complex);
    if (const auto* aim = dynamic_cast<const AimOperator*>(&sys.coupling())) {
      memory += aim->storage_bytes();
      add("aim_grid", std::to_string(aim->grid().counts[0]) + "x" + std::to_string(aim->grid().counts[1]) + "x" +
                          std::to_string(aim->grid().counts[2]));
      Eigen::Vector3i st = aim->grid().stencils();
      add("aim_stencils", std::to_string(st[0]) + "x" + std::to_string(st[1]) + "x" + std::to_string(st[2]));
      add("aim_near_nonzeros", std::to_string(aim->near_corrected().nonZeros()));
    } else {
      memory += static_cast<std::size_t>(sys.size() * sys.size()) * sizeof(Complex);
    }
    t0 = Clock::now();
    r.solve = gmres(sys, sys.rhs(), c.solver,
                    precond ? VectorMap([&](const CVector& y) { return sys.precondition(y); }) : nullptr);
    r.timing.emplace_back("solve_s", since(t0));
    CVector all = sys.recover_currents(r.solve.solution);
    // Drop image elements; their currents are restored analytically below.
    r.currents = all.head(r.scatterer_unknowns);
    if (c.estimate_condition) r.condition = estimate_condition(sys);
  }

  if (gap) {
    const ElementGeometry& e = problem.elements[gap->element];
    BasisSpace local = build_rwg(e.scatterer_mesh);
    int f = local.function_of_edge(gap->edge);
    Complex current = r.currents[offsets[gap->element] + f] * local.rwg()[f].edge_length;
    r.input_admittance = current / gap->voltage;
  }

  auto t0 = Clock::now();
  CurrentSamples src = sample_currents(scatterers, r.currents);
  if (c.excitation.image_plane) add_image(src, *c.excitation.image_plane);
  for (double phi : c.cuts_phi_deg)
    r.cuts.push_back(far_field(src, med, cut_angles(phi, c.cut_step_deg), c.excitation.image_plane.has_value()));
  r.timing.emplace_back("postprocess_s", since(t0));
  r.timing.emplace_back("total_s", since(t_all));

  add("scatterer_unknowns", std::to_string(r.scatterer_unknowns));
  add("total_unknowns", std::to_string(r.solved_unknowns));
  if (!direct) add("unknown_ratio", fmt(double(r.scatterer_unknowns) / double(r.solved_unknowns)));
  add("preconditioner", precond ? "block_jacobi" : "none");
  add("iterations", std::to_string(r.solve.iterations));
  add("converged", r.solve.converged ? "true" : "false");
  add("final_relative_residual", fmt(r.solve.history.empty() ? 0.0 : r.solve.history.back()));
  add("memory_estimate_bytes", std::to_string(memory));
  if (r.input_admittance) {
    add("input_admittance_re_s", fmt(r.input_admittance->real()));
    add("input_admittance_im_s", fmt(r.input_admittance->imag()));
  }
  if (r.condition) {
    add("condition_number", fmt(r.condition->value));
    add("condition_exact", r.condition->exact ? "true" : "false");
  }
  for (std::size_t i = 0; i < c.cuts_phi_deg.size(); ++i) {
    double peak = -300.0;
    for (const auto& s : r.cuts[i].samples) peak = std::max(peak, s.directivity_dbi);
    add("cut" + std::to_string(i + 1) + "_phi_deg", fmt(c.cuts_phi_deg[i]));
    add("cut" + std::to_string(i + 1) + "_peak_dbi", fmt(peak));
  }
  return r;
}

void write_artifacts(const RunResult& r, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  for (std::size_t i = 0; i < r.cuts.size(); ++i)
    write_cut_csv((dir / ("farfield_cut" + std::to_string(i + 1) + ".csv")).string(), r.cuts[i]);
  {
    std::ofstream f(dir / "iterations.csv");
    f << "iteration,relative_residual\n";
    char line[64];
    for (std::size_t i = 0; i < r.solve.history.size(); ++i) {
      std::snprintf(line, sizeof(line), "%zu,%.9e\n", i, r.solve.history[i]);
      f << line;
    }
    if (!f) throw Error("failed to write iterations.csv");
  }
  {
    std::ofstream f(dir / "report.txt");
    for (const auto& [k, v] : r.report) f << k << " = " << v << "\n";
    if (!f) throw Error("failed to write report.txt");
  }
  {
    std::ofstream f(dir / "timing.txt");
    for (const auto& [k, v] : r.timing) f << k << " = " << fmt(v) << "\n";
  }
}

}  // namespace mmsie
