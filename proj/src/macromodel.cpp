#include "mmsie/macromodel.hpp"

#include <chrono>
#include <cstring>
#include <fstream>

namespace mmsie {

ElementSpaces build_element_spaces(const TriangleMesh& scatterer, const TriangleMesh& equivalent) {
  auto eq = std::make_shared<const TriangleMesh>(equivalent);
  ElementSpaces s{build_rwg(std::make_shared<const TriangleMesh>(scatterer)), build_rwg(eq), BasisSpace(),
                  build_dual_rwg(eq)};
  s.split = s.equivalent.split_onto(s.dual.support_ptr());
  return s;
}

ElementMatrices build_element_matrices(const ElementSpaces& sp, const MediumParams& medium,
                                       const QuadratureRule& quad) {
  ElementMatrices m;
  m.g_ej = -assemble_L(sp.scatterer, sp.scatterer, medium, quad);
  m.g_eh = -assemble_L(sp.scatterer, sp.equivalent, medium, quad);
  m.gh_ej = -assemble_L(sp.equivalent, sp.scatterer, medium, quad);
  m.gh_eh = -assemble_L(sp.equivalent, sp.equivalent, medium, quad);
  m.g_ee = assemble_K(sp.scatterer, sp.dual, medium, quad);
  m.d = assemble_gram(sp.equivalent, sp.dual);
  m.gh_ee = assemble_K(sp.split, sp.dual, medium, quad);
  m.gh_ee += 0.5 * CMatrix(m.d.cast<Complex>());
  return m;
}

ElementMatrices build_element_matrices(const ElementGeometry& elem, const MediumParams& medium,
                                       const QuadratureRule& quad) {
  return build_element_matrices(build_element_spaces(elem.scatterer_mesh, elem.equivalent_mesh), medium, quad);
}

Macromodel build_macromodel(const ElementMatrices& m, std::uint64_t shape_id, double frequency_hz) {
  Macromodel out;
  out.shape_id = shape_id;
  out.frequency_hz = frequency_hz;
  out.n = m.g_ej.rows();
  out.n_hat = m.gh_eh.rows();
  const std::string at = " at " + std::to_string(frequency_hz) + " Hz (try a small frequency shift)";
  out.gh_eh = DenseLu(m.gh_eh, 1e12, "G(E^,H^)" + at);
  out.t = out.gh_eh.solve(m.gh_ej);
  CMatrix x = out.gh_eh.solve(m.gh_ee);
  out.a = DenseLu(m.g_ej - m.g_eh * out.t, 1e12, "A" + at);
  out.b = m.g_ee - m.g_eh * x;
  out.d = m.d;
  try {
    out.block = DenseLu(CMatrix(m.d.cast<Complex>()) - m.gh_ej * out.a.solve(out.b), 1e14, "preconditioner block");
    out.block_ok = true;
  } catch (const SingularMatrixError&) {
    out.block_ok = false;
  }
  return out;
}

Macromodel build_macromodel(const ElementGeometry& elem, const MediumParams& medium, const QuadratureRule& quad) {
  auto t0 = std::chrono::steady_clock::now();
  Macromodel out =
      build_macromodel(build_element_matrices(elem, medium, quad), elem.shape_id, medium.frequency);
  out.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

CVector Macromodel::recover_current(const CVector& e_hat, const CVector& v) const {
  if (e_hat.size() != n_hat) throw DimensionError("recover_current: expected " + std::to_string(n_hat) + " entries");
  CVector rhs = b * e_hat;
  if (v.size() != 0) {
    if (v.size() != n) throw DimensionError("recover_current: feed vector length");
    rhs += v;
  }
  return -a.solve(rhs);
}

CVector Macromodel::equivalent_current(const CVector& j) const {
  if (j.size() != n) throw DimensionError("equivalent_current: expected " + std::to_string(n) + " entries");
  return t * j;
}

namespace {

constexpr char kMagic[8] = {'M', 'M', 'S', 'I', 'E', 'M', 'M', '\0'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("macromodel file truncated");
  return v;
}

void put_lu(std::ostream& out, const DenseLu& lu) {
  put<double>(out, lu.rcond());
  write_matrix(out, lu.factors());
  put<std::int64_t>(out, lu.permutation().size());
  for (Eigen::Index i = 0; i < lu.permutation().size(); ++i) put<std::int32_t>(out, lu.permutation()[i]);
}

DenseLu get_lu(std::istream& in) {
  double rc = get<double>(in);
  CMatrix f = read_matrix(in);
  auto n = get<std::int64_t>(in);
  if (n != f.rows()) throw ParseError("macromodel: permutation size mismatch");
  Eigen::VectorXi p(n);
  for (Eigen::Index i = 0; i < n; ++i) p[i] = get<std::int32_t>(in);
  return DenseLu(std::move(f), std::move(p), rc);
}

}  // namespace

void save_macromodel(std::ostream& out, const Macromodel& m) {
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put<std::uint64_t>(out, m.shape_id);
  put<double>(out, m.frequency_hz);
  put<std::int64_t>(out, m.n);
  put<std::int64_t>(out, m.n_hat);
  write_matrix(out, m.t);
  put_lu(out, m.a);
  write_matrix(out, m.b);
  put_lu(out, m.gh_eh);
  write_matrix(out, CMatrix(m.d.cast<Complex>()));
  put<std::uint8_t>(out, m.block_ok ? 1 : 0);
  if (m.block_ok) put_lu(out, m.block);
  if (!out) throw Error("failed to write macromodel");
}

Macromodel load_macromodel(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw ParseError("not a macromodel file");
  auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw ParseError("unsupported macromodel version " + std::to_string(version));
  Macromodel m;
  m.shape_id = get<std::uint64_t>(in);
  m.frequency_hz = get<double>(in);
  m.n = get<std::int64_t>(in);
  m.n_hat = get<std::int64_t>(in);
  m.t = read_matrix(in);
  m.a = get_lu(in);
  m.b = read_matrix(in);
  m.gh_eh = get_lu(in);
  m.d = read_matrix(in).real().sparseView();
  m.block_ok = get<std::uint8_t>(in) != 0;
  if (m.block_ok) m.block = get_lu(in);
  if (m.t.rows() != m.n_hat || m.t.cols() != m.n || m.b.rows() != m.n || m.b.cols() != m.n_hat ||
      m.a.rows() != m.n || m.gh_eh.rows() != m.n_hat)
    throw ParseError("macromodel: inconsistent dimensions");
  return m;
}

void save_macromodel(const std::string& path, const Macromodel& model) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  save_macromodel(f, model);
}

Macromodel load_macromodel(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  return load_macromodel(f);
}

std::shared_ptr<const Macromodel> MacromodelCache::get(const ElementGeometry& elem, const MediumParams& medium,
                                                       const QuadratureRule& quad) {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (enabled_) {
      auto it = models_.find(elem.shape_id);
      if (it != models_.end()) {
        if (it->second->frequency_hz != medium.frequency)
          throw Error("macromodel cache holds shape at a different frequency");
        ++hits_;
        return it->second;
      }
    }
  }
  auto model = std::make_shared<const Macromodel>(build_macromodel(elem, medium, quad));
  std::lock_guard<std::mutex> lock(mutex_);
  ++builds_;
  seconds_ += model->build_seconds;
  if (!enabled_) return model;
  auto [it, inserted] = models_.emplace(elem.shape_id, model);
  return it->second;
}

void MacromodelCache::insert(std::shared_ptr<const Macromodel> model) {
  std::lock_guard<std::mutex> lock(mutex_);
  models_[model->shape_id] = std::move(model);
}

}  // namespace mmsie
