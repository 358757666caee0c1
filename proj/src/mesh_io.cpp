#include "nirom/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "nirom/csv.hpp"
#include "nirom/errors.hpp"

namespace nirom::io {

namespace fs = std::filesystem;
using ffd::TriMesh;
using ffd::Vec3;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

TriMesh read_stl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  TriMesh mesh;
  std::map<std::array<double, 3>, std::size_t> index;
  std::array<std::size_t, 3> tri{};
  int corner = -1;  // -1 outside a facet loop
  bool saw_solid = false, saw_end = false;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    return IoError(path.string() + ":" + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string keyword;
    if (!(ls >> keyword)) continue;
    keyword = lower(keyword);
    if (keyword == "solid") {
      if (saw_solid) throw fail("nested 'solid'");
      saw_solid = true;
    } else if (keyword == "facet") {
      if (!saw_solid || corner != -1) throw fail("unexpected 'facet'");
      corner = 0;
    } else if (keyword == "outer" || keyword == "endloop") {
      if (corner == -1) throw fail("'" + keyword + "' outside a facet");
    } else if (keyword == "vertex") {
      if (corner < 0 || corner > 2) throw fail("unexpected 'vertex'");
      std::array<double, 3> p{};
      for (double& c : p) {
        std::string tok;
        if (!(ls >> tok)) throw fail("vertex needs three coordinates");
        c = parse_double(tok, path.string() + ":" + std::to_string(lineno));
      }
      auto [it, inserted] = index.try_emplace(p, mesh.vertices.size());
      if (inserted) mesh.vertices.emplace_back(p[0], p[1], p[2]);
      tri[static_cast<std::size_t>(corner++)] = it->second;
    } else if (keyword == "endfacet") {
      if (corner != 3) throw fail("facet does not have exactly three vertices");
      mesh.triangles.push_back(tri);
      corner = -1;
    } else if (keyword == "endsolid") {
      if (corner != -1) throw fail("'endsolid' inside a facet");
      saw_end = true;
      break;
    } else {
      throw fail("unknown keyword '" + keyword + "'");
    }
  }
  if (!saw_solid) throw IoError(path.string() + ": missing 'solid' header");
  if (!saw_end) throw IoError(path.string() + ": missing 'endsolid'");
  mesh.validate();
  return mesh;
}

void write_stl(const fs::path& path, const TriMesh& mesh, const std::string& solid_name) {
  mesh.validate();
  std::ostringstream out;
  out << "solid " << solid_name << '\n';
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    if (len > 0.0) n /= len;
    out << "  facet normal " << format_double(n.x()) << ' ' << format_double(n.y()) << ' '
        << format_double(n.z()) << "\n    outer loop\n";
    for (const Vec3* v : {&a, &b, &c})
      out << "      vertex " << format_double(v->x()) << ' ' << format_double(v->y()) << ' '
          << format_double(v->z()) << '\n';
    out << "    endloop\n  endfacet\n";
  }
  out << "endsolid " << solid_name << '\n';
  write_text(path, out.str());
}

TriMesh read_point_csv(const fs::path& path) {
  const CsvTable t = read_csv(path, true);
  if (t.header.size() != 3 || t.header[0] != "x" || t.header[1] != "y" || t.header[2] != "z")
    throw IoError(path.string() + ": point cloud header must be 'x,y,z'");
  TriMesh mesh;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string where = path.string() + ":" + std::to_string(t.line_numbers[i]);
    mesh.vertices.emplace_back(parse_double(t.rows[i][0], where), parse_double(t.rows[i][1], where),
                               parse_double(t.rows[i][2], where));
  }
  mesh.validate();
  return mesh;
}

void write_point_csv(const fs::path& path, const TriMesh& mesh) {
  std::ostringstream out;
  out << "x,y,z\n";
  for (const auto& v : mesh.vertices)
    out << format_double(v.x()) << ',' << format_double(v.y()) << ',' << format_double(v.z()) << '\n';
  write_text(path, out.str());
}

TriMesh read_mesh(const fs::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".stl") return read_stl(path);
  if (ext == ".csv") return read_point_csv(path);
  throw IoError(path.string() + ": unsupported mesh extension '" + ext + "'");
}

void write_mesh(const fs::path& path, const TriMesh& mesh) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".stl") return write_stl(path, mesh);
  if (ext == ".csv") return write_point_csv(path, mesh);
  throw IoError(path.string() + ": unsupported mesh extension '" + ext + "'");
}

}  // namespace nirom::io
