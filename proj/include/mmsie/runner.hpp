#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mmsie/config.hpp"
#include "mmsie/postproc.hpp"

namespace mmsie {

ArrayProblem build_problem(const RunConfig& config);

struct RunResult {
  // Deterministic statistics (report.txt) and wall-clock times (timing.txt).
  std::vector<std::pair<std::string, std::string>> report;
  std::vector<std::pair<std::string, double>> timing;
  std::vector<FarFieldPattern> cuts;
  SolveResult solve;
  CVector currents;  // scatterer RWG coefficients, element by element
  Eigen::Index scatterer_unknowns = 0;
  Eigen::Index solved_unknowns = 0;
  std::optional<Complex> input_admittance;  // delta-gap runs
  std::optional<ConditionEstimate> condition;

  std::string value(const std::string& key) const;
};

RunResult run(const RunConfig& config);

// farfield_cut<i>.csv (1-based, in cut order), iterations.csv, report.txt, timing.txt.
void write_artifacts(const RunResult& result, const std::string& out_dir);

}  // namespace mmsie
