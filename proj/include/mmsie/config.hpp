#pragma once

#include <map>
#include <string>
#include <vector>

#include "mmsie/aim.hpp"
#include "mmsie/excitation.hpp"
#include "mmsie/solver.hpp"

namespace mmsie {

enum class Formulation { kDirect, kMacromodel };
enum class CouplingKind { kDense, kAim };

struct ElementTemplate {
  TriangleMesh scatterer;   // local coordinates
  TriangleMesh equivalent;  // local coordinates, closed
};

struct Placement {
  std::string element;
  Vec3 position = Vec3::Zero();
};

// Fully resolved run description. Every physical quantity is SI.
struct RunConfig {
  double frequency_hz = 0.0;
  Formulation formulation = Formulation::kMacromodel;
  CouplingKind coupling = CouplingKind::kDense;
  std::map<std::string, ElementTemplate> library;
  std::vector<Placement> placements;
  Excitation excitation;
  SolveOptions solver;
  AimParams aim;
  QuadratureRule quad;
  std::vector<double> cuts_phi_deg{0.0, 45.0, 90.0};
  double cut_step_deg = 1.0;
  bool cache = true;
  bool estimate_condition = false;
};

// Schema violations throw ParseError; invalid geometry throws GeometryError.
RunConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

// Key reference printed by the CLI.
const char* config_schema();

}  // namespace mmsie
