#include "tgqm/geom/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace tgqm {
namespace {

// Next line that is neither blank nor a comment.
bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

void fan(const std::vector<int>& poly, std::vector<Triangle>& out) {
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    out.push_back({poly[0], poly[k], poly[k + 1]});
  }
}

}  // namespace

MeshFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".off") return MeshFormat::Off;
  if (ext == ".obj") return MeshFormat::Obj;
  throw ParseError("unrecognized mesh extension '" + ext + "' (expected .off or .obj)");
}

RawMesh parse_off(std::istream& in) {
  std::string line;
  if (!next_content_line(in, line)) throw ParseError("OFF: empty file");
  std::istringstream header(line);
  std::string magic;
  header >> magic;
  if (magic != "OFF") throw ParseError("OFF: missing 'OFF' header");
  // Counts may follow the magic on the same line.
  long nv = -1, nf = -1, ne = 0;
  if (!(header >> nv >> nf)) {
    if (!next_content_line(in, line)) throw ParseError("OFF: missing counts line");
    std::istringstream counts(line);
    if (!(counts >> nv >> nf)) throw ParseError("OFF: malformed counts line");
    counts >> ne;
  }
  if (nv < 0 || nf < 0) throw ParseError("OFF: negative element counts");

  RawMesh raw;
  raw.vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    if (!next_content_line(in, line)) throw ParseError("OFF: truncated vertex list");
    std::istringstream s(line);
    double x, y, z;
    if (!(s >> x >> y >> z)) throw ParseError("OFF: malformed vertex line");
    raw.vertices.emplace_back(x, y, z);
  }
  std::vector<int> poly;
  for (long i = 0; i < nf; ++i) {
    if (!next_content_line(in, line)) throw ParseError("OFF: truncated face list");
    std::istringstream s(line);
    int k;
    if (!(s >> k) || k < 3) throw ParseError("OFF: malformed face line");
    poly.assign(k, 0);
    for (int j = 0; j < k; ++j) {
      if (!(s >> poly[j])) throw ParseError("OFF: face has too few indices");
      if (poly[j] < 0 || poly[j] >= nv) throw ParseError("OFF: face index out of range");
    }
    fan(poly, raw.triangles);
  }
  return raw;
}

RawMesh parse_obj(std::istream& in) {
  RawMesh raw;
  std::string line;
  std::vector<int> poly;
  while (next_content_line(in, line)) {
    std::istringstream s(line);
    std::string tag;
    s >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(s >> x >> y >> z)) throw ParseError("OBJ: malformed vertex record");
      raw.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      poly.clear();
      std::string tok;
      while (s >> tok) {
        // "i", "i/t", "i//n", "i/t/n": only the position index matters.
        const long idx = std::stol(tok.substr(0, tok.find('/')));
        const long n = static_cast<long>(raw.vertices.size());
        const long zero_based = idx > 0 ? idx - 1 : n + idx;
        if (idx == 0 || zero_based < 0 || zero_based >= n) {
          throw ParseError("OBJ: face index out of range");
        }
        poly.push_back(static_cast<int>(zero_based));
      }
      if (poly.size() < 3) throw ParseError("OBJ: face with fewer than 3 vertices");
      fan(poly, raw.triangles);
    }
    // Other records (vn, vt, g, o, usemtl, ...) carry nothing we use.
  }
  return raw;
}

Mesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file '" + path.string() + "'");
  RawMesh raw;
  try {
    raw = format == MeshFormat::Off ? parse_off(in) : parse_obj(in);
  } catch (const std::invalid_argument&) {
    throw ParseError("malformed number in '" + path.string() + "'");
  } catch (const std::out_of_range&) {
    throw ParseError("number out of range in '" + path.string() + "'");
  }
  return Mesh::from_triangles(std::move(raw.vertices), std::move(raw.triangles));
}

Mesh load_mesh(const std::filesystem::path& path) {
  return load_mesh(path, format_from_path(path));
}

void write_off(std::ostream& out, const std::vector<Vec3>& vertices,
               const std::vector<Triangle>& triangles) {
  out << "OFF\n" << vertices.size() << ' ' << triangles.size() << " 0\n";
  out << std::setprecision(17);
  for (const auto& v : vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

void write_off(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  write_off(out, mesh.vertices(), mesh.triangles());
}

}  // namespace tgqm
