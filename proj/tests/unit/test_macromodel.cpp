#include <doctest.h>

#include <sstream>

#include "mmsie/macromodel.hpp"
#include "mmsie/system.hpp"

using namespace mmsie;

namespace {

const MediumParams kMed = MediumParams::at(3e8);

ElementGeometry plate_element(const Vec3& at) {
  return make_element(generate_plate(Vec3::Zero(), 0.2, 0.1, 4, 2), generate_box(Vec3::Zero(), Vec3(0.3, 0.2, 0.1), 0.1),
                      at);
}

}  // namespace

TEST_CASE("T maps scatterer currents to equivalent currents") {
  QuadratureRule q;
  ElementMatrices em = build_element_matrices(plate_element(Vec3::Zero()), kMed, q);
  Macromodel m = build_macromodel(em, 1, kMed.frequency);
  CHECK(m.t.rows() == m.n_hat);
  CHECK(m.t.cols() == m.n);
  double res = (em.gh_eh * m.t - em.gh_ej).norm() / em.gh_ej.norm();
  CHECK(res < 1e-10);
  CMatrix bx = em.g_ee - em.g_eh * em.gh_eh.partialPivLu().solve(em.gh_ee);
  CHECK((m.b - bx).norm() / bx.norm() < 1e-10);
  CHECK(m.block_ok);
}

TEST_CASE("current recovery solves the element equations") {
  QuadratureRule q;
  ElementMatrices em = build_element_matrices(plate_element(Vec3::Zero()), kMed, q);
  Macromodel m = build_macromodel(em, 1, kMed.frequency);
  CVector e_hat = CVector::Random(m.n_hat);
  CVector v = CVector::Random(m.n);
  CVector j = m.recover_current(e_hat, v);
  CVector h_hat = -m.gh_eh.solve(CVector(em.gh_ej * j + em.gh_ee * e_hat));
  CVector r1 = em.g_ej * j + em.g_eh * h_hat + em.g_ee * e_hat + v;
  CHECK(r1.norm() / v.norm() < 1e-9);
  CHECK((m.equivalent_current(j) - m.t * j).norm() == 0.0);
  CHECK_THROWS_AS(m.recover_current(CVector::Zero(m.n_hat + 1)), DimensionError);
}

TEST_CASE("macromodel dump and load round trip") {
  QuadratureRule q;
  Macromodel m = build_macromodel(plate_element(Vec3::Zero()), kMed, q);
  std::stringstream buf;
  save_macromodel(buf, m);
  Macromodel r = load_macromodel(buf);
  CHECK(r.shape_id == m.shape_id);
  CHECK(r.frequency_hz == m.frequency_hz);
  CHECK(r.n == m.n);
  CHECK(r.n_hat == m.n_hat);
  CVector e = CVector::Random(m.n_hat);
  CVector j1 = m.recover_current(e), j2 = r.recover_current(e);
  CHECK(std::memcmp(j1.data(), j2.data(), sizeof(Complex) * j1.size()) == 0);
  CHECK(r.block_ok == m.block_ok);

  std::stringstream bad("not a macromodel");
  CHECK_THROWS_AS(load_macromodel(bad), ParseError);
  std::string s = buf.str();
  std::stringstream cut(s.substr(0, s.size() / 2));
  CHECK_THROWS_AS(load_macromodel(cut), ParseError);
}

TEST_CASE("cache builds each shape once") {
  QuadratureRule q;
  MacromodelCache on(true), off(false);
  for (int i = 0; i < 3; ++i) {
    ElementGeometry e = plate_element(Vec3(0.5 * i, 0, 0));
    auto a = on.get(e, kMed, q);
    off.get(e, kMed, q);
    CHECK(a->shape_id == e.shape_id);
  }
  CHECK(on.builds() == 1);
  CHECK(on.hits() == 2);
  CHECK(on.size() == 1);
  CHECK(off.builds() == 3);
  CHECK(off.hits() == 0);
  CHECK_THROWS(on.get(plate_element(Vec3::Zero()), MediumParams::at(4e8), q));
}

TEST_CASE("shape id ignores placement but not reflection") {
  TriangleMesh s = generate_bent_strip(Vec3(0, 0, 0.02), 0.2, 0.02, 45.0, 8, 1);
  TriangleMesh e = generate_box(Vec3(0, 0, 0.02), Vec3(0.3, 0.1, 0.2), 0.1);
  ElementGeometry a = make_element(s, e, Vec3::Zero());
  ElementGeometry b = make_element(s, e, Vec3(1.0, -2.0, 0.5));
  CHECK(a.shape_id == b.shape_id);
  ElementGeometry m = mirror_element(b, 0.0);
  CHECK(m.shape_id != b.shape_id);
  CHECK(m.translation.z() == doctest::Approx(-0.5));
}
