#include <fstream>
#include <map>
#include <sstream>

#include "mmsie/mesh.hpp"

namespace mmsie {

namespace {

TriangleMesh parse_simple_tri(std::istream& in) {
  std::vector<Vec3> verts;
  std::vector<Triangle> tris;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw ParseError("line " + std::to_string(lineno) + ": malformed vertex");
      verts.emplace_back(x, y, z);
    } else if (tag == "f") {
      long a, b, c;
      if (!(ls >> a >> b >> c)) throw ParseError("line " + std::to_string(lineno) + ": malformed face");
      auto nv = static_cast<long>(verts.size());
      if (a < 0 || b < 0 || c < 0 || a >= nv || b >= nv || c >= nv)
        throw ParseError("line " + std::to_string(lineno) + ": face index out of range");
      tris.push_back({static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)});
    } else {
      throw ParseError("line " + std::to_string(lineno) + ": unknown record '" + tag + "'");
    }
    std::string extra;
    if (ls >> extra) throw ParseError("line " + std::to_string(lineno) + ": trailing data");
  }
  if (tris.empty()) throw ParseError("no faces");
  return TriangleMesh(std::move(verts), std::move(tris));
}

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) return line;
  }
  throw ParseError(std::string("unexpected end of file in ") + what);
}

// Gmsh 2.x ASCII: $MeshFormat, $Nodes, $Elements. Only 3-node triangles
// (element type 2) are kept; other element types are skipped.
TriangleMesh parse_msh(std::istream& in) {
  std::map<long, Vec3> nodes;
  std::vector<std::array<long, 3>> elems;
  bool have_format = false, have_nodes = false, have_elems = false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "$MeshFormat") {
      std::istringstream ls(next_line(in, "$MeshFormat"));
      double version;
      int file_type, data_size;
      if (!(ls >> version >> file_type >> data_size)) throw ParseError("malformed $MeshFormat");
      if (version < 2.0 || version >= 3.0) throw ParseError("unsupported msh version");
      if (file_type != 0) throw ParseError("binary msh files are not supported");
      if (next_line(in, "$MeshFormat") != "$EndMeshFormat") throw ParseError("missing $EndMeshFormat");
      have_format = true;
    } else if (line == "$Nodes") {
      long n;
      if (!(std::istringstream(next_line(in, "$Nodes")) >> n) || n < 0) throw ParseError("malformed node count");
      for (long i = 0; i < n; ++i) {
        std::istringstream ls(next_line(in, "$Nodes"));
        long id;
        double x, y, z;
        if (!(ls >> id >> x >> y >> z)) throw ParseError("malformed node record");
        if (!nodes.emplace(id, Vec3(x, y, z)).second) throw ParseError("duplicate node id " + std::to_string(id));
      }
      if (next_line(in, "$Nodes") != "$EndNodes") throw ParseError("missing $EndNodes");
      have_nodes = true;
    } else if (line == "$Elements") {
      long n;
      if (!(std::istringstream(next_line(in, "$Elements")) >> n) || n < 0) throw ParseError("malformed element count");
      for (long i = 0; i < n; ++i) {
        std::istringstream ls(next_line(in, "$Elements"));
        long id, type, ntags;
        if (!(ls >> id >> type >> ntags) || ntags < 0) throw ParseError("malformed element record");
        for (long k = 0; k < ntags; ++k) {
          long tag;
          if (!(ls >> tag)) throw ParseError("malformed element tags");
        }
        if (type != 2) continue;
        std::array<long, 3> v{};
        if (!(ls >> v[0] >> v[1] >> v[2])) throw ParseError("malformed triangle element");
        elems.push_back(v);
      }
      if (next_line(in, "$Elements") != "$EndElements") throw ParseError("missing $EndElements");
      have_elems = true;
    } else if (line[0] == '$') {
      std::string end = "$End" + line.substr(1);
      while (next_line(in, line.c_str()) != end) {
      }
    } else {
      throw ParseError("unexpected content outside a section: " + line);
    }
  }
  if (!have_format || !have_nodes || !have_elems) throw ParseError("msh file lacks required sections");
  if (elems.empty()) throw ParseError("msh file has no triangle elements");
  std::map<long, int> remap;
  std::vector<Vec3> verts;
  std::vector<Triangle> tris;
  for (const auto& e : elems) {
    Triangle t{};
    for (int k = 0; k < 3; ++k) {
      auto it = nodes.find(e[k]);
      if (it == nodes.end()) throw ParseError("element references unknown node " + std::to_string(e[k]));
      auto [r, inserted] = remap.emplace(e[k], static_cast<int>(verts.size()));
      if (inserted) verts.push_back(it->second);
      t[k] = r->second;
    }
    tris.push_back(t);
  }
  return TriangleMesh(std::move(verts), std::move(tris));
}

}  // namespace

MeshFormat parse_mesh_format(const std::string& name) {
  if (name == "msh-ascii" || name == "msh") return MeshFormat::kMshAscii;
  if (name == "simple-tri" || name == "tri") return MeshFormat::kSimpleTri;
  throw ParseError("unknown mesh format '" + name + "'");
}

TriangleMesh parse_mesh(const std::string& text, MeshFormat format) {
  std::istringstream in(text);
  return format == MeshFormat::kMshAscii ? parse_msh(in) : parse_simple_tri(in);
}

TriangleMesh load_mesh(const std::string& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_mesh(buf.str(), format);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void save_simple_tri(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out.precision(17);
  for (const auto& v : mesh.vertices()) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles()) out << "f " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace mmsie
