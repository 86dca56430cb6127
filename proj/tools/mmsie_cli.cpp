#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "mmsie/runner.hpp"
#include "oracle.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace mmsie;

namespace {

constexpr int kExitSchema = 2;
constexpr int kExitGeometry = 3;
constexpr int kExitNotConverged = 4;

void print_mesh(const std::string& name, const TriangleMesh& m) {
  double lo = 1e300, hi = 0.0;
  for (const auto& e : m.edges()) {
    double l = (m.vertex(e.v0) - m.vertex(e.v1)).norm();
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  Vec3 a = m.bbox_min(), b = m.bbox_max();
  std::printf("%s\n", name.c_str());
  std::printf("  vertices        %zu\n  triangles       %zu\n  edges           %zu\n", m.num_vertices(),
              m.num_triangles(), m.num_edges());
  std::printf("  rwg_unknowns    %zu\n  closed          %s\n  area_m2         %.6g\n", m.num_interior_edges(),
              m.closed() ? "yes" : "no", m.total_area());
  std::printf("  edge_m          min %.6g mean %.6g max %.6g\n", lo, m.mean_edge_length(), hi);
  std::printf("  bbox_m          [%.6g %.6g %.6g] to [%.6g %.6g %.6g]\n", a.x(), a.y(), a.z(), b.x(), b.y(), b.z());
}

struct Check {
  std::string name;
  double value;
  double tolerance;
};

// Quick oracle comparisons; the full acceptance suite lives in the test tree.
std::vector<Check> run_validation() {
  std::vector<Check> out;
  {
    TriCorners t = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
    MediumParams med = MediumParams::at(1e3);
    QuadratureRule q;
    q.singular_order = 8;
    Complex v = singular_pair_integral(t, t, PairKind::kLCharge, med, q) * (4.0 * kPi);
    double ref = oracle::self_inverse_distance({t[0], t[1], t[2]});
    out.push_back({"self 1/R integral vs closed form", std::abs(v.real() - ref) / ref, 1e-6});
  }
  {
    TriCorners a = {Vec3(0, 0, 0), Vec3(0.1, 0, 0), Vec3(0.05, 0.08, 0)};
    TriCorners b = {Vec3(0.02, 0.01, 0.03), Vec3(0.12, 0.02, 0.04), Vec3(0.06, 0.09, 0.05)};
    MediumParams med = MediumParams::at(3e8);
    QuadratureRule q;
    Complex v = singular_pair_integral(a, b, PairKind::kLCharge, med, q);
    const double k = med.k0;
    Complex ref = oracle::adaptive_integral({a[0], a[1], a[2]}, {b[0], b[1], b[2]},
                                            [k](const Vec3& x, const Vec3& y) {
                                              double r = (x - y).norm();
                                              return Complex(std::cos(k * r), -std::sin(k * r)) / (4.0 * kPi * r);
                                            },
                                            1e-5);
    out.push_back({"near pair vs adaptive cubature", std::abs(v - ref) / std::abs(ref), 5e-4});
  }
  {
    const double f = 3e8, a = 0.5 * wavelength(f) / kPi;  // ka = 1
    ArrayProblem p;
    p.medium = MediumParams::at(f);
    PlaneWave pw;
    pw.direction = Vec3(0, 0, 1);
    p.excitation.source = pw;
    TriangleMesh s = generate_sphere(Vec3::Zero(), a, 2);
    p.elements.push_back(make_element(s, generate_sphere(Vec3::Zero(), 1.5 * a, 1), Vec3::Zero()));
    DirectSystem sys = assemble_direct(p);
    CVector j = sys.z.partialPivLu().solve(sys.rhs);
    CurrentSamples src = sample_currents(sys.space, j);
    std::vector<double> th;
    std::vector<std::pair<double, double>> ang;
    for (int i = 0; i <= 180; i += 5) {
      th.push_back(i);
      ang.emplace_back(i * kPi / 180.0, 0.0);
    }
    auto rcs = rcs_bistatic(far_field(src, p.medium, ang), 1.0);
    auto mie = oracle::mie_pec_sphere(a, f, th);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < th.size(); ++i) {
      num += std::pow(rcs[i] - mie.sigma_e_plane[i], 2);
      den += std::pow(mie.sigma_e_plane[i], 2);
    }
    out.push_back({"PEC sphere ka=1 RCS vs Mie (coarse mesh)", std::sqrt(num / den), 0.05});
  }
  {
    ArrayProblem p;
    p.medium = MediumParams::at(3e8);
    p.excitation.source = PlaneWave{};
    TriangleMesh plate = generate_plate(Vec3::Zero(), 0.2, 0.1, 6, 3);
    p.elements.push_back(make_element(plate, generate_box(Vec3::Zero(), Vec3(0.36, 0.26, 0.16), 0.09), Vec3::Zero()));
    DirectSystem d = assemble_direct(p);
    CVector jd = d.z.partialPivLu().solve(d.rhs);
    MacromodelCache cache;
    ReducedSystem r = assemble_reduced(p, cache);
    CVector e = to_dense(r).partialPivLu().solve(r.rhs());
    CVector jr = r.recover_currents(e);
    out.push_back({"plate macromodel vs direct currents", (jr - jd).norm() / jd.norm(), 0.02});
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Macromodel surface-integral-equation solver for PEC arrays"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0 keeps the default)");

  auto* run_cmd = app.add_subcommand("run", "solve a configured problem and write artifacts");
  std::string config, out_dir = "out";
  run_cmd->add_option("--config", config, "JSON configuration")->required();
  run_cmd->add_option("--out-dir", out_dir, "artifact directory");
  run_cmd->add_option("--threads", threads, "worker threads");

  auto* validate = app.add_subcommand("validate", "compare against the oracle implementations");
  validate->add_option("--threads", threads, "worker threads");

  auto* info = app.add_subcommand("mesh-info", "print mesh statistics");
  std::string mesh_path, mesh_format;
  info->add_option("--mesh", mesh_path, "mesh file");
  info->add_option("--format", mesh_format, "msh or tri (default from extension)");
  info->add_option("--config", config, "report every element of a configuration");

  auto* schema = app.add_subcommand("schema", "print the configuration keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitSchema;
  }
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (*schema) {
      std::cout << config_schema();
      return 0;
    }
    if (*info) {
      if (mesh_path.empty() == config.empty()) {
        std::cerr << "mesh-info: give exactly one of --mesh or --config\n";
        return kExitSchema;
      }
      if (!mesh_path.empty()) {
        std::string fmt = mesh_format;
        if (fmt.empty()) fmt = mesh_path.size() > 4 && mesh_path.substr(mesh_path.size() - 4) == ".msh" ? "msh" : "tri";
        print_mesh(mesh_path, load_mesh(mesh_path, parse_mesh_format(fmt)));
      } else {
        RunConfig c = load_config(config);
        for (const auto& [name, t] : c.library) {
          print_mesh(name + " scatterer", t.scatterer);
          print_mesh(name + " equivalent", t.equivalent);
        }
      }
      return 0;
    }
    if (*validate) {
      bool ok = true;
      for (const auto& c : run_validation()) {
        bool pass = c.value <= c.tolerance;
        ok = ok && pass;
        std::printf("%-45s %12.4e  <= %8.1e  %s\n", c.name.c_str(), c.value, c.tolerance, pass ? "PASS" : "FAIL");
      }
      return ok ? 0 : 1;
    }
    RunConfig c = load_config(config);
    RunResult r = run(c);
    write_artifacts(r, out_dir);
    for (const auto& [k, v] : r.report) std::cout << k << " = " << v << "\n";
    if (!r.solve.converged) {
      std::cerr << "solver did not converge in " << r.solve.iterations << " iterations\n";
      return kExitNotConverged;
    }
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return kExitGeometry;
  } catch (const TopologyError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return kExitGeometry;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
