#include "tgqm/geom/shapes.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace tgqm::shapes {
namespace {

constexpr double kPi = std::numbers::pi;

double signed_volume(const Shell& s) {
  double v = 0.0;
  for (const auto& t : s.triangles) {
    v += s.vertices[t[0]].dot(s.vertices[t[1]].cross(s.vertices[t[2]]));
  }
  return v / 6.0;
}

Shell oriented(Shell s) {
  if (signed_volume(s) < 0.0) {
    for (auto& t : s.triangles) std::swap(t[1], t[2]);
  }
  return s;
}

int pieces(double length, double max_edge) {
  return std::max(1, static_cast<int>(std::ceil(length / max_edge - 1e-9)));
}

}  // namespace

Shell& Shell::append(const Shell& other) {
  const int base = static_cast<int>(vertices.size());
  vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
  for (const auto& t : other.triangles) {
    triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
  return *this;
}

Shell& Shell::translate(const Vec3& t) {
  for (auto& v : vertices) v += t;
  return *this;
}

Shell& Shell::transform(const Mat3& rotation, const Vec3& t) {
  for (auto& v : vertices) v = rotation * v + t;
  if (rotation.determinant() < 0.0) {
    for (auto& tri : triangles) std::swap(tri[1], tri[2]);
  }
  return *this;
}

Mesh Shell::to_mesh() const { return Mesh::from_triangles(vertices, triangles); }

Shell extrude(const std::vector<Vec2>& polygon, const Vec2& star_center,
              const Vec3& u, const Vec3& v, const Vec3& w, double s0, double s1,
              double max_edge) {
  if (polygon.size() < 3) throw std::invalid_argument("extrude: polygon needs 3 points");
  std::vector<Vec2> ring;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Vec2& a = polygon[i];
    const Vec2& b = polygon[(i + 1) % polygon.size()];
    const int k = pieces((b - a).norm(), max_edge);
    for (int j = 0; j < k; ++j) ring.push_back(a + (b - a) * (double(j) / k));
  }
  const int m = static_cast<int>(ring.size());
  const int layers = pieces(std::abs(s1 - s0), max_edge);

  Shell s;
  for (int j = 0; j <= layers; ++j) {
    const double depth = s0 + (s1 - s0) * (double(j) / layers);
    for (const auto& p : ring) s.vertices.push_back(p.x() * u + p.y() * v + depth * w);
  }
  auto at = [m](int layer, int i) { return layer * m + (i % m); };
  for (int j = 0; j < layers; ++j) {
    for (int i = 0; i < m; ++i) {
      s.triangles.push_back({at(j, i), at(j, i + 1), at(j + 1, i + 1)});
      s.triangles.push_back({at(j, i), at(j + 1, i + 1), at(j + 1, i)});
    }
  }
  const int bottom = static_cast<int>(s.vertices.size());
  s.vertices.push_back(star_center.x() * u + star_center.y() * v + s0 * w);
  const int top = bottom + 1;
  s.vertices.push_back(star_center.x() * u + star_center.y() * v + s1 * w);
  for (int i = 0; i < m; ++i) {
    s.triangles.push_back({bottom, at(0, i + 1), at(0, i)});
    s.triangles.push_back({top, at(layers, i), at(layers, i + 1)});
  }
  return oriented(std::move(s));
}

Shell box(const Vec3& min, const Vec3& max, double max_edge) {
  const Vec3 e = max - min;
  const std::array<int, 3> n = {pieces(e.x(), max_edge), pieces(e.y(), max_edge),
                                pieces(e.z(), max_edge)};
  Shell s;
  // Surface lattice points are welded by their integer coordinates.
  std::map<std::array<int, 3>, int> index;
  auto vertex = [&](const std::array<int, 3>& ijk) {
    const auto it = index.find(ijk);
    if (it != index.end()) return it->second;
    Vec3 p;
    for (int k = 0; k < 3; ++k) {
      p[k] = ijk[k] == n[k] ? max[k] : min[k] + e[k] * (double(ijk[k]) / n[k]);
    }
    const int id = static_cast<int>(s.vertices.size());
    s.vertices.push_back(p);
    index.emplace(ijk, id);
    return id;
  };
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < n[b]; ++i) {
        for (int j = 0; j < n[c]; ++j) {
          std::array<int, 3> q00{}, q10{}, q11{}, q01{};
          for (auto* q : {&q00, &q10, &q11, &q01}) (*q)[a] = side * n[a];
          q00[b] = i;     q00[c] = j;
          q10[b] = i + 1; q10[c] = j;
          q11[b] = i + 1; q11[c] = j + 1;
          q01[b] = i;     q01[c] = j + 1;
          const int v00 = vertex(q00), v10 = vertex(q10), v11 = vertex(q11), v01 = vertex(q01);
          // e_b x e_c = e_a: counter-clockwise in (b, c) faces +a.
          if (side == 1) {
            s.triangles.push_back({v00, v10, v11});
            s.triangles.push_back({v00, v11, v01});
          } else {
            s.triangles.push_back({v00, v11, v10});
            s.triangles.push_back({v00, v01, v11});
          }
        }
      }
    }
  }
  return s;
}

Shell revolve(const std::vector<Vec2>& profile, int segments) {
  if (profile.size() < 3 || segments < 3) {
    throw std::invalid_argument("revolve: need >= 3 profile points and segments");
  }
  const bool open = profile.front().x() == 0.0;
  if (open && profile.back().x() != 0.0) {
    throw std::invalid_argument("revolve: open profile must end on the axis");
  }
  Shell s;
  std::vector<int> ring_start;
  const std::size_t first = open ? 1 : 0;
  const std::size_t last = open ? profile.size() - 1 : profile.size();
  for (std::size_t k = first; k < last; ++k) {
    ring_start.push_back(static_cast<int>(s.vertices.size()));
    for (int j = 0; j < segments; ++j) {
      const double a = 2.0 * kPi * j / segments;
      s.vertices.emplace_back(profile[k].x() * std::cos(a),
                              profile[k].x() * std::sin(a), profile[k].y());
    }
  }
  auto quad_strip = [&](int a, int b) {
    for (int j = 0; j < segments; ++j) {
      const int jn = (j + 1) % segments;
      s.triangles.push_back({a + j, a + jn, b + jn});
      s.triangles.push_back({a + j, b + jn, b + j});
    }
  };
  for (std::size_t k = 0; k + 1 < ring_start.size(); ++k) {
    quad_strip(ring_start[k], ring_start[k + 1]);
  }
  if (open) {
    const int south = static_cast<int>(s.vertices.size());
    s.vertices.emplace_back(0.0, 0.0, profile.front().y());
    const int north = south + 1;
    s.vertices.emplace_back(0.0, 0.0, profile.back().y());
    const int a = ring_start.front();
    const int b = ring_start.back();
    for (int j = 0; j < segments; ++j) {
      const int jn = (j + 1) % segments;
      s.triangles.push_back({south, a + jn, a + j});
      s.triangles.push_back({north, b + j, b + jn});
    }
  } else {
    quad_strip(ring_start.back(), ring_start.front());
  }
  return oriented(std::move(s));
}

Shell icosphere(double radius, int level, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  Shell s;
  s.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : s.vertices) v.normalize();
  s.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                 {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                 {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                 {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(s.vertices.size());
      s.vertices.push_back((s.vertices[a] + s.vertices[b]).normalized());
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Triangle> next;
    next.reserve(s.triangles.size() * 4);
    for (const auto& tri : s.triangles) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    s.triangles = std::move(next);
  }
  for (auto& v : s.vertices) v = center + radius * v;
  return oriented(std::move(s));
}

Shell cylinder(double radius, double z0, double z1, int radial_segments,
               int height_segments) {
  std::vector<Vec2> profile = {{0.0, z0}, {0.5 * radius, z0}};
  for (int k = 0; k <= height_segments; ++k) {
    profile.emplace_back(radius, z0 + (z1 - z0) * double(k) / height_segments);
  }
  profile.emplace_back(0.5 * radius, z1);
  profile.emplace_back(0.0, z1);
  return revolve(profile, radial_segments);
}

Shell torus(double major_radius, double minor_radius, int major_segments,
            int minor_segments) {
  std::vector<Vec2> loop;
  for (int k = 0; k < minor_segments; ++k) {
    const double a = 2.0 * kPi * k / minor_segments;
    loop.emplace_back(major_radius + minor_radius * std::cos(a),
                      minor_radius * std::sin(a));
  }
  return revolve(loop, major_segments);
}

// Handle along +x, head across y at the far end.
Shell hammer() {
  Shell s = box({0.0, -0.011, -0.014}, {0.28, 0.011, 0.014}, 0.01);
  s.append(box({0.28, -0.065, -0.02}, {0.32, 0.065, 0.02}, 0.01));
  return s;
}

// Blade along +x with its sharp edge pointing to -z; handle along -x.
Shell knife() {
  Shell s = box({-0.11, -0.011, -0.012}, {0.0, 0.011, 0.012}, 0.01);
  const std::vector<Vec2> blade = {{0.0, -0.026}, {0.0015, 0.012}, {-0.0015, 0.012}};
  // Cross-section in (y, z), swept along x.
  s.append(extrude(blade, {0.0, 0.005}, Vec3::UnitY(), Vec3::UnitZ(),
                   Vec3::UnitX(), 0.0, 0.20, 0.006));
  return s;
}

Shell bottle() {
  const std::vector<Vec2> profile = {
      {0.0, 0.0},     {0.02, 0.0},    {0.034, 0.002}, {0.035, 0.01},
      {0.035, 0.06},  {0.035, 0.11},  {0.035, 0.16},  {0.03, 0.185},
      {0.018, 0.205}, {0.013, 0.215}, {0.013, 0.245}, {0.014, 0.25},
      {0.0, 0.25}};
  return revolve(profile, 32);
}

// Double-edged blade along +x, guard across y, grip along -x.
Shell sword() {
  Shell s = box({-0.14, -0.013, -0.013}, {0.0, 0.013, 0.013}, 0.012);
  s.append(box({0.0, -0.09, -0.015}, {0.025, 0.09, 0.015}, 0.012));
  const std::vector<Vec2> blade = {{-0.025, 0.0}, {0.0, -0.003}, {0.025, 0.0}, {0.0, 0.003}};
  s.append(extrude(blade, {0.0, 0.0}, Vec3::UnitY(), Vec3::UnitZ(),
                   Vec3::UnitX(), 0.025, 0.52, 0.008));
  return s;
}

Shell screwdriver() {
  const std::vector<Vec2> profile = {
      {0.0, 0.0},     {0.012, 0.0},  {0.016, 0.006}, {0.016, 0.05},
      {0.016, 0.095}, {0.011, 0.1},  {0.0035, 0.1},  {0.0035, 0.15},
      {0.0035, 0.19}, {0.002, 0.205}, {0.0, 0.207}};
  return revolve(profile, 24);
}

// Haft along +x, flat head across y at the far end with its edge at +y.
Shell axe() {
  Shell s = box({0.0, -0.012, -0.015}, {0.34, 0.012, 0.015}, 0.012);
  const std::vector<Vec2> head = {
      {0.34, -0.04}, {0.40, -0.04}, {0.40, 0.02}, {0.43, 0.10}, {0.31, 0.10}, {0.34, 0.02}};
  // Outline in (x, y), thickness along z.
  s.append(extrude(head, {0.37, 0.03}, Vec3::UnitX(), Vec3::UnitY(),
                   Vec3::UnitZ(), -0.008, 0.008, 0.01));
  return s;
}

Shell glass() {
  const std::vector<Vec2> loop = {
      {0.001, 0.0},  {0.03, 0.0},   {0.037, 0.004}, {0.04, 0.06},
      {0.042, 0.12}, {0.039, 0.12}, {0.037, 0.06},  {0.034, 0.012},
      {0.001, 0.012}};
  return revolve(loop, 32);
}

Shell l_block() {
  const std::vector<Vec2> l = {{0, 0}, {0.2, 0}, {0.2, 0.05}, {0.05, 0.05}, {0.05, 0.2}, {0, 0.2}};
  return extrude(l, {0.025, 0.025}, Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ(),
                 0.0, 0.05, 0.02);
}

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "hammer", "knife", "bottle", "sword", "screwdriver", "axe", "glass"};
  return names;
}

Shell builtin(const std::string& name) {
  if (name == "hammer") return hammer();
  if (name == "knife") return knife();
  if (name == "bottle") return bottle();
  if (name == "sword") return sword();
  if (name == "screwdriver") return screwdriver();
  if (name == "axe") return axe();
  if (name == "glass") return glass();
  if (name == "l_block") return l_block();
  throw std::invalid_argument("unknown builtin shape '" + name + "'");
}

}  // namespace tgqm::shapes
