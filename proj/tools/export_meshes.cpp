// Writes every bundled procedural shape as <dir>/<name>.off.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "tgqm/geom/io.hpp"
#include "tgqm/geom/shapes.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: tgqm_export_meshes <directory>\n";
    return 1;
  }
  const std::filesystem::path dir(argv[1]);
  std::filesystem::create_directories(dir);
  for (const auto& name : tgqm::shapes::builtin_names()) {
    const tgqm::shapes::Shell s = tgqm::shapes::builtin(name);
    std::ofstream out(dir / (name + ".off"));
    tgqm::write_off(out, s.vertices, s.triangles);
    if (!out) {
      std::cerr << "cannot write " << (dir / (name + ".off")) << '\n';
      return 1;
    }
    std::cout << name << ": " << s.vertices.size() << " vertices, " << s.triangles.size()
              << " triangles\n";
  }
  return 0;
}
