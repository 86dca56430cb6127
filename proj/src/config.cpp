#include "mmsie/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mmsie {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError("config: " + where + ": " + what);
}

void allow(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail(where, "expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!ok.count(k)) fail(where, "unknown key '" + k + "'");
}

const json& need(const json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

double num(const json& obj, const std::string& where, const char* key) {
  return number(need(obj, where, key), where + "." + key);
}

double num_or(const json& obj, const std::string& where, const char* key, double dflt) {
  return obj.contains(key) ? number(obj[key], where + "." + key) : dflt;
}

int integer(const json& obj, const std::string& where, const char* key, int dflt, bool required = false) {
  if (!obj.contains(key)) {
    if (required) fail(where, std::string("missing key '") + key + "'");
    return dflt;
  }
  const json& v = obj[key];
  if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
  return v.get<int>();
}

double positive(double v, const std::string& where) {
  if (!(v > 0.0)) fail(where, "must be positive");
  return v;
}

Vec3 vec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) fail(where, "expected an array of 3 numbers");
  return Vec3(number(v[0], where), number(v[1], where), number(v[2], where));
}

// Complex components are either numbers or [re, im] pairs.
Complex complex_value(const json& v, const std::string& where) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2) return Complex(number(v[0], where), number(v[1], where));
  fail(where, "expected a number or [re, im]");
}

CVec3 cvec3(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) fail(where, "expected an array of 3 components");
  return CVec3(complex_value(v[0], where), complex_value(v[1], where), complex_value(v[2], where));
}

std::string text(const json& obj, const std::string& where, const char* key, const std::string& dflt = "") {
  if (!obj.contains(key)) {
    if (dflt.empty()) fail(where, std::string("missing key '") + key + "'");
    return dflt;
  }
  if (!obj[key].is_string()) fail(where + "." + key, "expected a string");
  return obj[key].get<std::string>();
}

TriangleMesh surface(const json& s, const std::string& where, const std::string& base_dir) {
  if (!s.is_object()) fail(where, "expected an object");
  if (s.contains("file")) {
    allow(s, where, {"file", "format", "center_m"});
    std::filesystem::path p(text(s, where, "file"));
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    std::string fmt = text(s, where, "format", p.extension() == ".msh" ? "msh" : "tri");
    MeshFormat f;
    try {
      f = parse_mesh_format(fmt);
    } catch (const ParseError& e) {
      fail(where + ".format", e.what());
    }
    TriangleMesh m = load_mesh(p.string(), f);
    return s.contains("center_m") ? m.translated(vec3(s["center_m"], where + ".center_m")) : m;
  }
  const std::string g = text(s, where, "generator");
  const std::string at = where + "(" + g + ")";
  Vec3 c = s.contains("center_m") ? vec3(s["center_m"], where + ".center_m") : Vec3::Zero();
  if (g == "plate") {
    allow(s, where, {"generator", "center_m", "size_x_m", "size_y_m", "nx", "ny"});
    return generate_plate(c, positive(num(s, at, "size_x_m"), at), positive(num(s, at, "size_y_m"), at),
                          integer(s, at, "nx", 0, true), integer(s, at, "ny", 0, true));
  }
  if (g == "box") {
    allow(s, where, {"generator", "center_m", "dims_m", "edge_m"});
    return generate_box(c, vec3(need(s, at, "dims_m"), at + ".dims_m"), positive(num(s, at, "edge_m"), at));
  }
  if (g == "sphere") {
    allow(s, where, {"generator", "center_m", "radius_m", "subdivisions"});
    return generate_sphere(c, positive(num(s, at, "radius_m"), at), integer(s, at, "subdivisions", 0, true));
  }
  if (g == "cross") {
    allow(s, where, {"generator", "center_m", "arm_length_m", "arm_width_m", "cells_per_width"});
    return generate_cross(c, positive(num(s, at, "arm_length_m"), at), positive(num(s, at, "arm_width_m"), at),
                          integer(s, at, "cells_per_width", 0, true));
  }
  if (g == "bent_strip") {
    allow(s, where, {"generator", "center_m", "length_m", "width_m", "angle_deg", "nx", "ny"});
    return generate_bent_strip(c, positive(num(s, at, "length_m"), at), positive(num(s, at, "width_m"), at),
                               num(s, at, "angle_deg"), integer(s, at, "nx", 0, true), integer(s, at, "ny", 0, true));
  }
  if (g == "meander") {
    allow(s, where, {"generator", "center_m", "turns", "pitch_m", "height_m", "width_m", "cells_per_width"});
    return generate_meander(c, integer(s, at, "turns", 0, true), positive(num(s, at, "pitch_m"), at),
                            positive(num(s, at, "height_m"), at), positive(num(s, at, "width_m"), at),
                            integer(s, at, "cells_per_width", 0, true));
  }
  if (g == "cell_mask") {
    allow(s, where, {"generator", "origin_m", "cell_m", "mask"});
    const json& mk = need(s, at, "mask");
    if (!mk.is_array() || mk.empty()) fail(at + ".mask", "expected a non-empty array of strings");
    std::vector<std::string> rows;
    for (const auto& r : mk) {
      if (!r.is_string()) fail(at + ".mask", "expected strings");
      rows.push_back(r.get<std::string>());
    }
    Vec3 o = s.contains("origin_m") ? vec3(s["origin_m"], at + ".origin_m") : Vec3::Zero();
    return generate_cell_mask(o, positive(num(s, at, "cell_m"), at), rows);
  }
  fail(where, "unknown generator '" + g + "'");
}

// Default equivalent surface: a box around the scatterer with a margin of two
// scatterer edge lengths and a tenth-wavelength mesh.
TriangleMesh equivalent_surface(const json& e, const std::string& where, const TriangleMesh& scatterer,
                                double lambda, const std::string& base_dir) {
  if (e.is_object() && (e.contains("file") || text(e, where, "generator", "box") != "box" || e.contains("dims_m")))
    return surface(e, where, base_dir);
  json obj = e.is_null() ? json::object() : e;
  allow(obj, where, {"generator", "margin_m", "edge_m"});
  double h = scatterer.max_edge_length();
  double margin = num_or(obj, where, "margin_m", 2.0 * h);
  double edge = num_or(obj, where, "edge_m", 0.1 * lambda);
  positive(margin, where + ".margin_m");
  positive(edge, where + ".edge_m");
  Vec3 lo = scatterer.bbox_min(), hi = scatterer.bbox_max();
  return generate_box(0.5 * (lo + hi), (hi - lo).array() + 2.0 * margin, edge);
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  allow(root, "root",
        {"frequency_hz", "method", "elements", "array", "placements", "excitation", "ground_plane_z_m", "solver",
         "aim", "quadrature", "output"});
  RunConfig c;
  c.frequency_hz = positive(num(root, "root", "frequency_hz"), "frequency_hz");
  const double lambda = wavelength(c.frequency_hz);

  if (root.contains("method")) {
    const json& m = root["method"];
    allow(m, "method", {"formulation", "coupling"});
    std::string f = text(m, "method", "formulation", "macromodel");
    if (f == "direct")
      c.formulation = Formulation::kDirect;
    else if (f != "macromodel")
      fail("method.formulation", "expected 'direct' or 'macromodel'");
    std::string k = text(m, "method", "coupling", "dense");
    if (k == "aim")
      c.coupling = CouplingKind::kAim;
    else if (k != "dense")
      fail("method.coupling", "expected 'dense' or 'aim'");
  }

  const json& lib = need(root, "root", "elements");
  if (!lib.is_object() || lib.empty()) fail("elements", "expected a non-empty object of named elements");
  for (const auto& [name, e] : lib.items()) {
    const std::string w = "elements." + name;
    allow(e, w, {"scatterer", "equivalent"});
    ElementTemplate t;
    t.scatterer = surface(need(e, w, "scatterer"), w + ".scatterer", base_dir);
    t.equivalent = equivalent_surface(e.contains("equivalent") ? e["equivalent"] : json(), w + ".equivalent",
                                      t.scatterer, lambda, base_dir);
    c.library.emplace(name, std::move(t));
  }

  if (root.contains("array") == root.contains("placements"))
    fail("root", "exactly one of 'array' or 'placements' is required");
  if (root.contains("array")) {
    const json& a = root["array"];
    allow(a, "array", {"nx", "ny", "spacing_x_m", "spacing_y_m", "origin_m", "element", "layout"});
    int nx = integer(a, "array", "nx", 1), ny = integer(a, "array", "ny", 1);
    if (nx < 1 || ny < 1) fail("array", "nx and ny must be positive");
    double dx = nx > 1 ? positive(num(a, "array", "spacing_x_m"), "array.spacing_x_m") : num_or(a, "array", "spacing_x_m", 0.0);
    double dy = ny > 1 ? positive(num(a, "array", "spacing_y_m"), "array.spacing_y_m") : num_or(a, "array", "spacing_y_m", 0.0);
    Vec3 origin = a.contains("origin_m") ? vec3(a["origin_m"], "array.origin_m") : Vec3::Zero();
    std::vector<std::vector<std::string>> ids(ny, std::vector<std::string>(nx));
    if (a.contains("layout")) {
      const json& l = a["layout"];
      if (!l.is_array() || static_cast<int>(l.size()) != ny) fail("array.layout", "expected ny rows");
      for (int iy = 0; iy < ny; ++iy) {
        if (!l[iy].is_array() || static_cast<int>(l[iy].size()) != nx) fail("array.layout", "expected nx ids per row");
        for (int ix = 0; ix < nx; ++ix) {
          if (!l[iy][ix].is_string()) fail("array.layout", "expected element names");
          ids[iy][ix] = l[iy][ix].get<std::string>();
        }
      }
    } else {
      std::string e = a.contains("element") ? text(a, "array", "element") : lib.begin().key();
      for (auto& row : ids) std::fill(row.begin(), row.end(), e);
    }
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix)
        c.placements.push_back({ids[iy][ix], origin + Vec3(ix * dx, iy * dy, 0.0)});
  } else {
    const json& p = root["placements"];
    if (!p.is_array()) fail("placements", "expected an array");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::string w = "placements[" + std::to_string(i) + "]";
      allow(p[i], w, {"element", "position_m"});
      c.placements.push_back({text(p[i], w, "element"), vec3(need(p[i], w, "position_m"), w + ".position_m")});
    }
  }
  if (c.placements.empty()) fail("root", "the problem has no elements");
  for (const auto& pl : c.placements)
    if (!c.library.count(pl.element)) fail("array", "unknown element '" + pl.element + "'");

  const json& ex = need(root, "root", "excitation");
  const std::string type = text(ex, "excitation", "type");
  if (type == "plane_wave") {
    allow(ex, "excitation", {"type", "direction", "polarization", "amplitude_v_per_m"});
    PlaneWave pw;
    pw.direction = vec3(need(ex, "excitation", "direction"), "excitation.direction");
    pw.polarization = vec3(need(ex, "excitation", "polarization"), "excitation.polarization");
    pw.amplitude = ex.contains("amplitude_v_per_m") ? complex_value(ex["amplitude_v_per_m"], "excitation.amplitude_v_per_m")
                                                    : Complex(1.0, 0.0);
    c.excitation.source = pw;
  } else if (type == "hertzian_dipole") {
    allow(ex, "excitation", {"type", "position_m", "moment_a_m"});
    HertzianDipole d;
    d.position = vec3(need(ex, "excitation", "position_m"), "excitation.position_m");
    d.moment = cvec3(need(ex, "excitation", "moment_a_m"), "excitation.moment_a_m");
    c.excitation.source = d;
  } else if (type == "delta_gap") {
    allow(ex, "excitation", {"type", "element", "edge", "feed_point_m", "voltage_v"});
    DeltaGap g;
    g.element = integer(ex, "excitation", "element", 0);
    if (g.element < 0 || g.element >= static_cast<int>(c.placements.size()))
      fail("excitation.element", "index out of range");
    const TriangleMesh& s = c.library.at(c.placements[g.element].element).scatterer;
    if (ex.contains("edge") == ex.contains("feed_point_m"))
      fail("excitation", "exactly one of 'edge' or 'feed_point_m' is required");
    g.edge = ex.contains("edge") ? integer(ex, "excitation", "edge", -1)
                                 : nearest_interior_edge(s, vec3(ex["feed_point_m"], "excitation.feed_point_m"));
    if (g.edge < 0 || g.edge >= static_cast<int>(s.num_edges()) || !s.edges()[g.edge].interior())
      fail("excitation.edge", "not an interior edge of the element's scatterer");
    g.voltage = ex.contains("voltage_v") ? complex_value(ex["voltage_v"], "excitation.voltage_v") : Complex(1.0, 0.0);
    c.excitation.source = g;
  } else {
    fail("excitation.type", "expected 'plane_wave', 'hertzian_dipole' or 'delta_gap'");
  }
  if (root.contains("ground_plane_z_m")) c.excitation.image_plane = number(root["ground_plane_z_m"], "ground_plane_z_m");
  try {
    c.excitation.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    fail("excitation", e.what());
  }

  if (root.contains("solver")) {
    const json& s = root["solver"];
    allow(s, "solver", {"tol", "max_iters", "restart", "preconditioner"});
    c.solver.rel_tol = num_or(s, "solver", "tol", c.solver.rel_tol);
    c.solver.max_iters = integer(s, "solver", "max_iters", c.solver.max_iters);
    c.solver.restart = integer(s, "solver", "restart", std::min(c.solver.restart, c.solver.max_iters));
    std::string p = text(s, "solver", "preconditioner", "block_jacobi");
    if (p == "none")
      c.solver.preconditioner = PreconditionerKind::kNone;
    else if (p == "block_jacobi")
      c.solver.preconditioner = PreconditionerKind::kBlockJacobi;
    else
      fail("solver.preconditioner", "expected 'none' or 'block_jacobi'");
  } else {
    c.solver.preconditioner = PreconditionerKind::kBlockJacobi;
  }
  if (root.contains("aim")) {
    const json& a = root["aim"];
    allow(a, "aim", {"order", "near_stencils", "spacing_m", "projection_points"});
    c.aim.order = integer(a, "aim", "order", c.aim.order);
    c.aim.near_stencils = integer(a, "aim", "near_stencils", c.aim.near_stencils);
    c.aim.spacing_m = num_or(a, "aim", "spacing_m", 0.0);
    c.aim.projection_points = integer(a, "aim", "projection_points", c.aim.projection_points);
  }
  if (root.contains("quadrature")) {
    const json& q = root["quadrature"];
    allow(q, "quadrature", {"order", "near_order", "near_threshold", "singular_order"});
    c.quad.order = integer(q, "quadrature", "order", c.quad.order);
    c.quad.near_order = integer(q, "quadrature", "near_order", c.quad.near_order);
    c.quad.near_threshold = num_or(q, "quadrature", "near_threshold", c.quad.near_threshold);
    c.quad.singular_order = integer(q, "quadrature", "singular_order", c.quad.singular_order);
  }
  if (root.contains("output")) {
    const json& o = root["output"];
    allow(o, "output", {"cuts_phi_deg", "step_deg", "cache", "estimate_condition"});
    if (o.contains("cuts_phi_deg")) {
      const json& cuts = o["cuts_phi_deg"];
      if (!cuts.is_array() || cuts.empty()) fail("output.cuts_phi_deg", "expected a non-empty array");
      c.cuts_phi_deg.clear();
      for (const auto& v : cuts) c.cuts_phi_deg.push_back(number(v, "output.cuts_phi_deg"));
    }
    c.cut_step_deg = positive(num_or(o, "output", "step_deg", 1.0), "output.step_deg");
    if (o.contains("cache")) {
      if (!o["cache"].is_boolean()) fail("output.cache", "expected true or false");
      c.cache = o["cache"].get<bool>();
    }
    if (o.contains("estimate_condition")) {
      if (!o["estimate_condition"].is_boolean()) fail("output.estimate_condition", "expected true or false");
      c.estimate_condition = o["estimate_condition"].get<bool>();
    }
  }
  try {
    c.solver.validate();
    c.aim.validate();
    c.quad.validate();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), std::filesystem::path(path).parent_path().string().empty()
                                    ? std::string(".")
                                    : std::filesystem::path(path).parent_path().string());
}

const char* config_schema() {
  return R"(JSON object (comments allowed). Keys:
  frequency_hz            number, required
  method                  {formulation: "macromodel"|"direct", coupling: "dense"|"aim"}
  elements                {name: {scatterer: SURFACE, equivalent: SURFACE | {margin_m, edge_m}}}, required
  array                   {nx, ny, spacing_x_m, spacing_y_m, origin_m: [x,y,z], element: name,
                           layout: [[name, ...] per row]}
  placements              [{element: name, position_m: [x,y,z]}]  (instead of array)
  excitation              {type: "plane_wave", direction: [..], polarization: [..], amplitude_v_per_m}
                          {type: "hertzian_dipole", position_m: [..], moment_a_m: [c, c, c]}
                          {type: "delta_gap", element: index, edge: index | feed_point_m: [..], voltage_v}
                          complex values are numbers or [re, im]
  ground_plane_z_m        number, PEC plane handled by images
  solver                  {tol, max_iters, restart, preconditioner: "block_jacobi"|"none"}
  aim                     {order, near_stencils, spacing_m, projection_points}
  quadrature              {order, near_order, near_threshold, singular_order}
  output                  {cuts_phi_deg: [..], step_deg, cache: bool, estimate_condition: bool}
SURFACE:
  {file: path, format: "msh"|"tri", center_m}
  {generator: "plate", size_x_m, size_y_m, nx, ny, center_m}
  {generator: "box", dims_m: [..], edge_m, center_m}
  {generator: "sphere", radius_m, subdivisions, center_m}
  {generator: "cross", arm_length_m, arm_width_m, cells_per_width, center_m}
  {generator: "bent_strip", length_m, width_m, angle_deg, nx, ny, center_m}
  {generator: "meander", turns, pitch_m, height_m, width_m, cells_per_width, center_m}
  {generator: "cell_mask", origin_m, cell_m, mask: ["#..", ...]}
)";
}

}  // namespace mmsie
