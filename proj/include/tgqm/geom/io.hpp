#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "tgqm/geom/mesh.hpp"

namespace tgqm {

/// File-system failure while reading or writing artifacts.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MeshFormat { Off, Obj };

/// Picks the format from the file extension (case-insensitive .off / .obj).
MeshFormat format_from_path(const std::filesystem::path& path);

/// Reads an ASCII OFF or a vertices/faces-only OBJ file. Polygons with more
/// than three corners are fan-triangulated.
Mesh load_mesh(const std::filesystem::path& path, MeshFormat format);
Mesh load_mesh(const std::filesystem::path& path);

struct RawMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
};

RawMesh parse_off(std::istream& in);
RawMesh parse_obj(std::istream& in);

void write_off(std::ostream& out, const std::vector<Vec3>& vertices,
               const std::vector<Triangle>& triangles);
void write_off(const std::filesystem::path& path, const Mesh& mesh);

}  // namespace tgqm
