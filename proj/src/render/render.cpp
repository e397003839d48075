#include "tgqm/render/render.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>


namespace tgqm {

namespace {

constexpr double kPi = 3.14159265358979323846;

void put_u32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>(v >> 24)};
  out.write(b, 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void CameraParams::validate() const {
  if (width < 8 || height < 8) throw std::invalid_argument("camera width and height must be >= 8");
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw std::invalid_argument("camera fov must be in (0, 180)");
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
}

double CameraParams::focal() const {
  return 0.5 * height / std::tan(0.5 * fov_deg * kPi / 180.0);
}

CameraPose camera_for_pregrasp(const Mesh& mesh, const Pregrasp& p0, const HandConfig& hand) {
  const HandPose hp = pregrasp_pose(p0, mesh, hand);
  const Vec3 z = hp.approach();
  // Same plane offsets as the hand, applied in the local frame so a
  // translated mesh yields bit-identical rays.
  const Vec3 x0 = orthogonal_unit(z);
  const Vec3 y0 = z.cross(x0);
  const Vec3 half = 0.5 * mesh.local_extent();
  auto support = [&](const Vec3& u) { return u.cwiseAbs().dot(half); };
  CameraPose pose;
  pose.rotation = hp.rotation;
  pose.local_center = mesh.local_center_of_mass() + p0.offset_x * support(x0) * x0 +
                      p0.offset_y * support(y0) * y0 - mesh.local_extent().norm() * z;
  return pose;
}

std::size_t RangeImage::finite_count() const {
  return static_cast<std::size_t>(
      std::count_if(depth.begin(), depth.end(), [](double d) { return std::isfinite(d); }));
}

Vec3 pixel_ray(const CameraParams& cam, int row, int col) {
  return unproject(cam, row, col, 1.0).normalized();
}

Vec3 unproject(const CameraParams& cam, double row, double col, double depth) {
  const double f = cam.focal();
  return Vec3((col + 0.5 - 0.5 * cam.width) / f * depth, (row + 0.5 - 0.5 * cam.height) / f * depth,
              depth);
}

Vec3 project(const CameraParams& cam, const Vec3& p) {
  const double f = cam.focal();
  return Vec3(f * p.y() / p.z() + 0.5 * cam.height - 0.5, f * p.x() / p.z() + 0.5 * cam.width - 0.5,
              p.z());
}

RangeImage render_depth(const Mesh& mesh, const CameraPose& pose, const CameraParams& cam) {
  cam.validate();
  RangeImage img;
  img.width = cam.width;
  img.height = cam.height;
  img.pose = pose;
  img.depth.assign(static_cast<std::size_t>(cam.width) * cam.height, RangeImage::kBackground);
  std::mt19937_64 rng(cam.noise_seed);
  std::normal_distribution<double> noise(0.0, cam.noise_sigma > 0 ? cam.noise_sigma : 1.0);
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      const Vec3 d = pixel_ray(cam, r, c);
      const auto hit = mesh.ray_first_hit_local(pose.local_center, pose.rotation * d);
      if (!hit) continue;
      double depth = hit->distance * d.z();
      if (cam.noise_sigma > 0) depth = std::max(1e-9, depth + noise(rng));
      img.depth[static_cast<std::size_t>(r) * cam.width + c] = depth;
    }
  }
  return img;
}

RangeImage render_depth(const Mesh& mesh, const Pregrasp& p0, const CameraParams& cam,
                        const HandConfig& hand) {
  return render_depth(mesh, camera_for_pregrasp(mesh, p0, hand), cam);
}

PointCloud depth_to_cloud(const RangeImage& img, const CameraParams& cam, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("point count must be >= 1");
  if (img.width != cam.width || img.height != cam.height) {
    throw std::invalid_argument("image size does not match the camera");
  }
  std::vector<Vec3> pts;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const double d = img.at(r, c);
      if (std::isfinite(d)) pts.push_back(unproject(cam, r, c, d));
    }
  }
  PointCloud cloud;
  const auto want = static_cast<std::size_t>(n);
  if (pts.size() > want) {
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < want; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    order.resize(want);
    std::sort(order.begin(), order.end());
    for (std::size_t i : order) cloud.points.push_back(pts[i]);
  } else {
    cloud.points = std::move(pts);
  }
  cloud.from_image = cloud.points.size();
  cloud.points.resize(want, Vec3::Zero());
  return cloud;
}

void write_grim(const std::filesystem::path& path, const RangeImage& img) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write("GRIM", 4);
  put_u32(out, static_cast<std::uint32_t>(img.width));
  put_u32(out, static_cast<std::uint32_t>(img.height));
  for (double d : img.depth) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(d)));
  if (!out) throw IoError("write failed on " + path.string());
}

RangeImage read_grim(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open raster " + path.string());
  unsigned char h[12];
  in.read(reinterpret_cast<char*>(h), 12);
  if (in.gcount() != 12 || std::string(reinterpret_cast<char*>(h), 4) != "GRIM") {
    throw IoError(path.string() + " is not a GRIM raster");
  }
  RangeImage img;
  img.width = static_cast<int>(get_u32(h + 4));
  img.height = static_cast<int>(get_u32(h + 8));
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  std::vector<unsigned char> buf(4 * n);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) throw IoError("truncated raster " + path.string());
  img.depth.resize(n);
  for (std::size_t i = 0; i < n; ++i) img.depth[i] = std::bit_cast<float>(get_u32(&buf[4 * i]));
  return img;
}

void write_pgm(const std::filesystem::path& path, const RangeImage& img) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double d : img.depth) {
    if (!std::isfinite(d)) continue;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << img.width << ' ' << img.height << "\n65535\n";
  for (double d : img.depth) {
    std::uint16_t v = 0;
    if (std::isfinite(d)) {
      v = hi > lo ? static_cast<std::uint16_t>(std::lround(1.0 + 65534.0 * (hi - d) / (hi - lo))) : 65535;
    }
    const char b[2] = {static_cast<char>(v >> 8), static_cast<char>(v & 0xff)};
    out.write(b, 2);
  }
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace tgqm
