#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmsie/runner.hpp"

using namespace mmsie;

namespace {

const char* kPlate = R"({
  "frequency_hz": 3e8,
  "elements": {"plate": {"scatterer": {"generator": "plate", "size_x_m": 0.2, "size_y_m": 0.1, "nx": 12, "ny": 6},
                        "equivalent": {"edge_m": 0.12}}},
  "array": {"nx": 2, "ny": 1, "spacing_x_m": 0.6, "spacing_y_m": 0.6, "element": "plate"},
  "excitation": {"type": "plane_wave", "direction": [0, 0, -1], "polarization": [1, 0, 0]},
  "output": {"cuts_phi_deg": [0, 90], "step_deg": 5}
})";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config parses and resolves an array") {
  RunConfig c = parse_config(kPlate);
  CHECK(c.frequency_hz == 3e8);
  CHECK(c.placements.size() == 2);
  CHECK(c.placements[1].position.x() - c.placements[0].position.x() == doctest::Approx(0.6));
  CHECK(c.library.count("plate") == 1);
  CHECK(c.library.at("plate").equivalent.closed());
  CHECK(c.cuts_phi_deg.size() == 2);
  ArrayProblem p = build_problem(c);
  CHECK(p.elements.size() == 2);
  CHECK(p.elements[0].shape_id == p.elements[1].shape_id);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("{"), ParseError);
  CHECK_THROWS_AS(parse_config(R"({"frequency_hz": 3e8, "excitation": {"type": "plane_wave"}})"), ParseError);
  std::string unknown = kPlate;
  unknown.insert(1, R"("frequncy": 1,)");
  CHECK_THROWS_AS(parse_config(unknown), ParseError);
  std::string neg = kPlate;
  neg.replace(neg.find("3e8"), 3, "-1");
  CHECK_THROWS_AS(parse_config(neg), ParseError);
  std::string close = kPlate;
  close.replace(close.find("\"spacing_x_m\": 0.6"), 18, "\"spacing_x_m\": 0.1");
  RunConfig c = parse_config(close);
  CHECK_THROWS_AS(run(c), GeometryError);
  CHECK(std::string(config_schema()).find("excitation") != std::string::npos);
}

TEST_CASE("direct and macromodel runs agree and report sizes") {
  RunConfig c = parse_config(kPlate);
  RunResult mm = run(c);
  c.formulation = Formulation::kDirect;
  RunResult dr = run(c);
  CHECK(mm.solve.converged);
  CHECK(dr.solve.converged);
  CHECK(mm.scatterer_unknowns == dr.scatterer_unknowns);
  CHECK(mm.solved_unknowns < mm.scatterer_unknowns);
  CHECK(dr.solved_unknowns == dr.scatterer_unknowns);
  CHECK(mm.value("method") == "macromodel-dense");
  CHECK(dr.value("method") == "direct");
  CHECK(mm.value("macromodel_builds") == "1");
  CHECK(mm.value("macromodel_cache_hits") == "1");
  CHECK((mm.currents - dr.currents).norm() <= 0.05 * dr.currents.norm());
  REQUIRE(mm.cuts.size() == 2);
  CHECK(mm.cuts[0].samples.size() == 73);
}

TEST_CASE("artifacts are byte-reproducible") {
  namespace fs = std::filesystem;
  RunConfig c = parse_config(kPlate);
  fs::path base = fs::temp_directory_path() / "mmsie_repro";
  fs::remove_all(base);
  write_artifacts(run(c), (base / "a").string());
  write_artifacts(run(c), (base / "b").string());
  for (const char* f : {"farfield_cut1.csv", "farfield_cut2.csv", "iterations.csv", "report.txt"}) {
    CHECK(fs::exists(base / "a" / f));
    CHECK(slurp(base / "a" / f) == slurp(base / "b" / f));
  }
  CHECK(slurp(base / "a" / "farfield_cut1.csv").rfind("theta_deg,phi_deg,D_dBi", 0) == 0);
  CHECK(fs::exists(base / "a" / "timing.txt"));
  fs::remove_all(base);
}
