#include <doctest.h>

#include "mmsie/solver.hpp"

using namespace mmsie;

namespace {

ElementGeometry plate_element(const Vec3& at) {
  return make_element(generate_plate(Vec3::Zero(), 0.2, 0.1, 4, 2), generate_box(Vec3::Zero(), Vec3(0.3, 0.2, 0.1), 0.1),
                      at);
}

ArrayProblem plate_array(std::vector<Vec3> at) {
  ArrayProblem p;
  for (const auto& a : at) p.elements.push_back(plate_element(a));
  p.medium = MediumParams::at(3e8);
  return p;
}

}  // namespace

TEST_CASE("reduced matvec matches the explicit block formula") {
  ArrayProblem p = plate_array({Vec3::Zero(), Vec3(0.45, 0.1, 0.0)});
  MacromodelCache cache;
  ReducedSystem r = assemble_reduced(p, cache);
  CHECK(cache.builds() == 1);
  CHECK(r.size() == 2 * r.models()[0]->n_hat);
  CMatrix z = assemble_L(r.equivalent_space(), r.equivalent_space(), p.medium, p.quad);
  CVector y = CVector::Random(r.size());
  CVector expect(r.size());
  CVector tab(r.size());
  for (std::size_t m = 0; m < 2; ++m) {
    const Macromodel& mm = *r.models()[m];
    auto o = r.offsets_hat()[m];
    CVector yb = y.segment(o, mm.n_hat);
    expect.segment(o, mm.n_hat) = mm.d.cast<Complex>() * yb;
    tab.segment(o, mm.n_hat) = mm.t * mm.a.solve(CVector(mm.b * yb));
  }
  expect += z * tab;
  CHECK((r.apply(y) - expect).norm() <= 1e-12 * expect.norm());
  CHECK_THROWS_AS(r.apply(CVector::Zero(r.size() + 1)), DimensionError);
}

TEST_CASE("single element: block-Jacobi is the exact inverse") {
  ArrayProblem p = plate_array({Vec3::Zero()});
  MacromodelCache cache;
  ReducedSystem r = assemble_reduced(p, cache);
  SolveOptions o;
  SolveResult s = gmres(r, r.rhs(), o, [&](const CVector& y) { return r.precondition(y); });
  CHECK(s.converged);
  CHECK(s.iterations == 1);
}

TEST_CASE("zero excitation gives zero equivalent fields") {
  ArrayProblem p = plate_array({Vec3::Zero(), Vec3(0.5, 0, 0)});
  std::get<PlaneWave>(p.excitation.source).amplitude = 0.0;
  MacromodelCache cache;
  ReducedSystem r = assemble_reduced(p, cache);
  CHECK(r.rhs().norm() == 0.0);
  SolveResult s = gmres(r, r.rhs(), SolveOptions{});
  CHECK(s.converged);
  CHECK(s.iterations == 0);
  CHECK(r.recover_currents(s.solution).norm() == 0.0);
}

TEST_CASE("coupling blocks decay with separation") {
  MediumParams med = MediumParams::at(3e8);
  QuadratureRule q;
  TriangleMesh box = generate_box(Vec3::Zero(), Vec3(0.3, 0.2, 0.1), 0.1);
  BasisSpace a = build_rwg(box);
  std::vector<double> norms;
  for (double d : {0.5, 1.0, 2.0, 4.0}) {
    BasisSpace b = build_rwg(box.translated(Vec3(d, 0, 0)));
    norms.push_back(assemble_L(a, b, med, q).norm());
  }
  for (std::size_t i = 1; i < norms.size(); ++i) CHECK(norms[i] < norms[i - 1]);
  // Far zone: 1/d.
  CHECK(norms[3] / norms[2] == doctest::Approx(0.5).epsilon(0.15));
}

TEST_CASE("overlapping equivalent surfaces are rejected") {
  ArrayProblem p = plate_array({Vec3::Zero(), Vec3(0.2, 0, 0)});
  MacromodelCache cache;
  try {
    assemble_reduced(p, cache);
    FAIL("expected GeometryError");
  } catch (const GeometryError& e) {
    CHECK(std::string(e.what()).find("elements 0 and 1") != std::string::npos);
  }
  ArrayProblem touching = plate_array({Vec3::Zero(), Vec3(0.3, 0, 0)});
  CHECK_THROWS_AS(assemble_reduced(touching, cache), GeometryError);
}

TEST_CASE("direct and reduced unknown counts") {
  ArrayProblem p = plate_array({Vec3::Zero()});
  p.elements[0] = make_element(generate_plate(Vec3::Zero(), 0.2, 0.1, 12, 6),
                               generate_box(Vec3::Zero(), Vec3(0.3, 0.2, 0.1), 0.1), Vec3::Zero());
  DirectSystem d = assemble_direct(p);
  MacromodelCache cache;
  ReducedSystem r = assemble_reduced(p, cache);
  CHECK(d.z.rows() == r.scatterer_unknowns());
  CHECK(r.size() < r.scatterer_unknowns());
  CHECK((d.z - d.z.transpose()).norm() <= 1e-6 * d.z.norm());
}
