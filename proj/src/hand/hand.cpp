#include "tgqm/hand/hand.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tgqm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
// Distances below this count as touching.
constexpr double kTouch = 1e-6;
// Approach hits within this of the minimum count as simultaneous.
constexpr double kTieDistance = 1e-9;
// Fractions of a closing step treated as simultaneous.
constexpr double kTieFraction = 1e-9;

const std::array<double, 3> kBaseAngle = {kPi / 3.0, -kPi / 3.0, kPi};

Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return c * v + s * axis.cross(v) + (1.0 - c) * axis.dot(v) * axis;
}

int pieces(double length, double spacing) {
  return std::max(1, static_cast<int>(std::ceil(length / spacing - 1e-9)));
}

// One collision sample point and where it came from.
struct Proxy {
  Vec3 p;                       // world position
  ContactSource source;
  int finger;
  int link;
  double along;                 // parameter along its link (or palm x)
  double across;                // palm y; unused for links
};

struct ProxyHit {
  int proxy;
  Vec3 point;
  int triangle;
};

Contact make_contact(const Proxy& px, const Vec3& point, int triangle, const Mesh& mesh) {
  Contact c;
  c.point = point;
  c.triangle = triangle;
  c.normal = mesh.normals()[triangle];
  c.source = px.source;
  c.finger = px.finger;
  c.link = px.link;
  return c;
}

// Keeps extreme members of a tie: per link the two ends, on the palm the
// extremes along hand x and y.
std::vector<ProxyHit> reduce_ties(const std::vector<ProxyHit>& hits,
                                  const std::vector<Proxy>& proxies) {
  std::vector<ProxyHit> out;
  auto add = [&](const ProxyHit& h) {
    for (const auto& o : out) {
      if (o.proxy == h.proxy) return;
    }
    out.push_back(h);
  };
  // Group key: palm is (-1,-1).
  std::vector<std::pair<int, int>> groups;
  for (const auto& h : hits) {
    const auto& px = proxies[h.proxy];
    const std::pair<int, int> key{px.finger, px.link};
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  for (const auto& key : groups) {
    std::vector<const ProxyHit*> g;
    for (const auto& h : hits) {
      const auto& px = proxies[h.proxy];
      if (px.finger == key.first && px.link == key.second) g.push_back(&h);
    }
    auto extreme = [&](auto value, bool want_max) {
      const ProxyHit* best = g.front();
      for (const ProxyHit* h : g) {
        const double v = value(proxies[h->proxy]);
        const double b = value(proxies[best->proxy]);
        if (want_max ? v > b : v < b) best = h;
      }
      add(*best);
    };
    auto along = [](const Proxy& p) { return p.along; };
    auto across = [](const Proxy& p) { return p.across; };
    extreme(along, false);
    extreme(along, true);
    if (key.first < 0) {
      extreme(across, false);
      extreme(across, true);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const ProxyHit& a, const ProxyHit& b) { return a.proxy < b.proxy; });
  return out;
}

// Rotates `points` about the line (pivot, axis) from 0 toward `limit`.
// Returns the stop angle and the proxies in contact there (empty at limit).
struct SweepResult {
  double angle = 0.0;
  std::vector<ProxyHit> hits;
};

SweepResult sweep(const Mesh& mesh, const std::vector<Proxy>& proxies,
                  const std::vector<int>& moving, const Vec3& pivot, const Vec3& axis,
                  double limit, double step) {
  SweepResult res;
  std::vector<Vec3> rel(moving.size());
  std::vector<double> radius(moving.size());
  for (std::size_t k = 0; k < moving.size(); ++k) {
    rel[k] = proxies[moving[k]].p - pivot;
    radius[k] = axis.cross(rel[k]).norm();
  }
  auto at = [&](std::size_t k, double a) { return pivot + rotate_about(rel[k], axis, a); };

  double a = 0.0;
  while (a < limit) {
    // Conservative advancement: a point at distance d from the mesh moving on
    // a circle of radius r cannot reach it before turning d / r.
    double safe = limit - a;
    for (std::size_t k = 0; k < moving.size(); ++k) {
      if (radius[k] <= 0.0) continue;
      const Vec3 p = at(k, a);
      const ClosestPoint cp = mesh.closest_point(p, radius[k] * safe + kTouch);
      if (cp.triangle < 0) continue;
      if (cp.distance <= kTouch) {
        const Vec3 velocity = axis.cross(p - pivot);
        if (velocity.dot(mesh.normals()[cp.triangle]) < 0.0) {
          res.hits.push_back({moving[k], cp.point, cp.triangle});
        }
        continue;
      }
      safe = std::min(safe, (cp.distance - 0.5 * kTouch) / radius[k]);
    }
    if (!res.hits.empty()) {
      res.angle = a;
      return res;
    }
    if (safe >= step || a + safe >= limit) {
      a = std::min(limit, a + safe);
      continue;
    }
    // Close to the surface: sweep one step with chord rays.
    const double next = std::min(limit, a + step);
    double best = 2.0;
    std::vector<std::pair<double, ProxyHit>> found;
    for (std::size_t k = 0; k < moving.size(); ++k) {
      if (radius[k] <= 0.0) continue;
      const Vec3 p0 = at(k, a);
      const Vec3 chord = at(k, next) - p0;
      const double len = chord.norm();
      if (len <= 0.0) continue;
      const auto hit = mesh.ray_first_hit(Ray{p0, chord / len}, len);
      if (!hit) continue;
      const double f = hit->distance / len;
      found.push_back({f, {moving[k], hit->point, hit->triangle}});
      best = std::min(best, f);
    }
    if (best <= 1.0) {
      for (const auto& [f, h] : found) {
        if (f <= best + kTieFraction) res.hits.push_back(h);
      }
      res.angle = a + best * (next - a);
      return res;
    }
    a = next;
  }
  res.angle = limit;
  return res;
}

}  // namespace

Pregrasp Pregrasp::from_array(const std::array<double, 6>& v) {
  return Pregrasp{v[0], v[1], v[2], v[3], v[4], v[5]};
}

std::array<double, 6> Pregrasp::to_array() const {
  return {approach_theta, approach_phi, roll, offset_x, offset_y, spread};
}

void Pregrasp::validate() const {
  const auto v = to_array();
  for (int i = 0; i < 5; ++i) {
    if (!(v[i] >= -1.0 && v[i] <= 1.0)) {
      throw std::invalid_argument("pregrasp value " + std::to_string(i) +
                                  " outside [-1, 1]");
    }
  }
  if (!(spread >= 0.0 && spread <= 1.0)) {
    throw std::invalid_argument("pregrasp spread outside [0, 1]");
  }
}

Vec3 spherical_direction(double t, double p) {
  const double theta = 0.5 * (t + 1.0) * kPi;
  const double phi = p * kPi;
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta)};
}

void HandConfig::validate() const {
  if (!(palm_radius > 0 && link1 > 0 && link2 > 0 && standoff_factor > 0 &&
        proxy_spacing > 0 && closing_step_deg > 0 && merge_distance >= 0)) {
    throw std::invalid_argument("hand: lengths and steps must be positive");
  }
  if (!(joint_limit_deg > 0 && joint_limit_deg <= 180)) {
    throw std::invalid_argument("hand: joint limit must be in (0, 180] degrees");
  }
}

FingerGeometry finger_geometry(int finger, double spread, double q1, double q2,
                               const HandConfig& hand) {
  FingerGeometry g;
  const double base = kBaseAngle.at(finger);
  g.base = hand.palm_radius * Vec3(std::cos(base), std::sin(base), 0.0);
  if (finger == 2) {
    g.closing = Vec3::UnitX();
  } else {
    const double turn = finger == 0 ? 0.5 * spread : -0.5 * spread;
    g.closing = Vec3(-std::cos(turn), -std::sin(turn), 0.0);
  }
  const Vec3 z = Vec3::UnitZ();
  const Vec3 u1 = std::cos(q1) * z + std::sin(q1) * g.closing;
  const Vec3 u2 = std::cos(q1 + q2) * z + std::sin(q1 + q2) * g.closing;
  g.joint = g.base + hand.link1 * u1;
  g.tip = g.joint + hand.link2 * u2;
  return g;
}

HandPose pregrasp_pose(const Pregrasp& p0, const Mesh& mesh, const HandConfig& hand) {
  p0.validate();
  const Vec3 z = -spherical_direction(p0.approach_theta, p0.approach_phi);
  const Vec3 x0 = orthogonal_unit(z);
  const Vec3 y0 = z.cross(x0);
  const double roll = p0.roll * kPi;
  HandPose pose;
  pose.rotation.col(0) = std::cos(roll) * x0 + std::sin(roll) * y0;
  pose.rotation.col(1) = z.cross(pose.rotation.col(0));
  pose.rotation.col(2) = z;

  // Half-extent of the bounding box along a unit direction.
  const Vec3 half = 0.5 * mesh.local_extent();
  auto support = [&](const Vec3& u) { return u.cwiseAbs().dot(half); };
  const double back =
      hand.standoff_factor * mesh.bounding_radius() + hand.finger_length();
  pose.wrist = mesh.center_of_mass() - back * z +
               p0.offset_x * support(x0) * x0 + p0.offset_y * support(y0) * y0;
  return pose;
}

Grasp execute_policy(const Mesh& mesh, const Pregrasp& p0, const HandConfig& hand) {
  return execute_policy(mesh, pregrasp_pose(p0, mesh, hand), p0.spread * kPi, hand);
}

Grasp execute_policy(const Mesh& mesh, const HandPose& start, double spread,
                     const HandConfig& hand) {
  hand.validate();
  Grasp g;
  g.pose = start;
  g.spread = spread;

  // Collision proxies in the open pose, hand frame.
  std::vector<Proxy> local;
  const int rings = pieces(hand.palm_radius, hand.proxy_spacing);
  for (int k = 0; k <= rings; ++k) {
    const double r = hand.palm_radius * k / rings;
    const int n = k == 0 ? 1 : pieces(2.0 * kPi * r, hand.proxy_spacing);
    for (int j = 0; j < n; ++j) {
      const double a = 2.0 * kPi * j / n;
      const Vec3 q(r * std::cos(a), r * std::sin(a), 0.0);
      local.push_back({q, ContactSource::Palm, -1, -1, q.x(), q.y()});
    }
  }
  std::array<std::vector<int>, 3> link_proxies[2];
  for (int f = 0; f < 3; ++f) {
    const FingerGeometry fg = finger_geometry(f, spread, 0.0, 0.0, hand);
    const int n1 = pieces(hand.link1, hand.proxy_spacing);
    for (int k = 0; k <= n1; ++k) {
      const double t = double(k) / n1;
      link_proxies[0][f].push_back(static_cast<int>(local.size()));
      local.push_back({fg.base + t * (fg.joint - fg.base), ContactSource::Link, f, 0, t, 0.0});
    }
    const int n2 = pieces(hand.link2, hand.proxy_spacing);
    for (int k = 1; k <= n2; ++k) {
      const double t = double(k) / n2;
      link_proxies[1][f].push_back(static_cast<int>(local.size()));
      local.push_back({fg.joint + t * (fg.tip - fg.joint), ContactSource::Link, f, 1, t, 0.0});
    }
  }

  // Phase 1: exact sweep of every proxy along the approach axis.
  const Vec3 z = start.approach();
  // The start pose is pushed back by the finger length, so the allowed travel
  // grows by the same amount and the palm still sweeps up to 2R past the
  // center of mass.
  const double max_travel = 4.0 * mesh.bounding_radius() + hand.finger_length();
  std::vector<Proxy> proxies = local;
  std::vector<std::pair<double, ProxyHit>> approach_hits;
  double travel = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < proxies.size(); ++i) {
    proxies[i].p = start.to_world(local[i].p);
    const auto hit = mesh.ray_first_hit(Ray{proxies[i].p, z}, max_travel);
    if (!hit) continue;
    approach_hits.push_back({hit->distance, {static_cast<int>(i), hit->point, hit->triangle}});
    travel = std::min(travel, hit->distance);
  }
  if (approach_hits.empty()) return g;

  g.reached_object = true;
  g.travel = travel;
  g.pose.wrist = start.wrist + travel * z;
  for (auto& p : proxies) p.p += travel * z;

  std::vector<ProxyHit> first;
  for (const auto& [d, h] : approach_hits) {
    if (d <= travel + kTieDistance) first.push_back(h);
  }
  std::vector<ProxyHit> touching = reduce_ties(first, proxies);
  std::vector<Contact> contacts;
  std::array<bool, 3> frozen{};
  for (const auto& h : touching) {
    contacts.push_back(make_contact(proxies[h.proxy], h.point, h.triangle, mesh));
    // A finger already touching on its distal link cannot close any further.
    const auto& px = proxies[h.proxy];
    if (px.source == ContactSource::Link && px.link == 1) frozen[px.finger] = true;
  }

  // Phase 2: close each finger, proximal joint first.
  const double limit = hand.joint_limit_deg * kDeg;
  const double step = hand.closing_step_deg * kDeg;
  for (int f = 0; f < 3; ++f) {
    if (frozen[f]) continue;
    const FingerGeometry open = finger_geometry(f, spread, 0.0, 0.0, hand);
    const Vec3 axis = g.pose.rotation * Vec3::UnitZ().cross(open.closing);
    const Vec3 base = g.pose.to_world(open.base);

    std::vector<int> moving = link_proxies[0][f];
    moving.insert(moving.end(), link_proxies[1][f].begin(), link_proxies[1][f].end());
    const SweepResult prox = sweep(mesh, proxies, moving, base, axis, limit, step);
    for (int i : moving) proxies[i].p = base + rotate_about(proxies[i].p - base, axis, prox.angle);
    g.joints[2 * f] = prox.angle;

    bool distal_touched = false;
    for (const auto& h : reduce_ties(prox.hits, proxies)) {
      contacts.push_back(make_contact(proxies[h.proxy], h.point, h.triangle, mesh));
      if (proxies[h.proxy].link == 1) distal_touched = true;
    }
    if (distal_touched) continue;

    const Vec3 joint = g.pose.to_world(finger_geometry(f, spread, prox.angle, 0.0, hand).joint);
    const SweepResult dist =
        sweep(mesh, proxies, link_proxies[1][f], joint, axis, limit, step);
    g.joints[2 * f + 1] = dist.angle;
    for (const auto& h : reduce_ties(dist.hits, proxies)) {
      contacts.push_back(make_contact(proxies[h.proxy], h.point, h.triangle, mesh));
    }
  }

  // Merge near-duplicate contacts, keeping the earliest.
  for (const auto& c : contacts) {
    bool dup = false;
    for (const auto& k : g.contacts) {
      if ((k.point - c.point).norm() < hand.merge_distance) {
        dup = true;
        break;
      }
    }
    if (!dup) g.contacts.push_back(c);
  }
  return g;
}

}  // namespace tgqm
