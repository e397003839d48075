#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "tgqm/geom/io.hpp"
#include "tgqm/geom/mesh.hpp"
#include "tgqm/hand/hand.hpp"

namespace tgqm {

/// Square-pixel pinhole camera. The field of view is vertical.
struct CameraParams {
  int width = 128;
  int height = 128;
  double fov_deg = 60.0;
  double noise_sigma = 0.0;  // optional Gaussian depth noise, meters
  std::uint64_t noise_seed = 0;

  void validate() const;  // throws std::invalid_argument
  double focal() const;   // pixels
};

/// Camera placement relative to the mesh's local frame (see
/// Mesh::local_origin). Image x runs along rotation.col(0), image y along
/// rotation.col(1); the optical axis is rotation.col(2).
struct CameraPose {
  Vec3 local_center = Vec3::Zero();
  Mat3 rotation = Mat3::Identity();
};

/// Camera-in-hand placement for a pregrasp: one bounding-box diagonal behind
/// the center of mass along the approach, shifted by the pregrasp offsets,
/// looking along the approach with the hand's roll.
CameraPose camera_for_pregrasp(const Mesh& mesh, const Pregrasp& p0, const HandConfig& hand = {});

struct RangeImage {
  static constexpr double kBackground = std::numeric_limits<double>::infinity();

  int width = 0;
  int height = 0;
  std::vector<double> depth;  // row-major, meters along the optical axis
  CameraPose pose;

  double at(int row, int col) const { return depth[static_cast<std::size_t>(row) * width + col]; }
  std::size_t finite_count() const;
};

RangeImage render_depth(const Mesh& mesh, const CameraPose& pose, const CameraParams& cam = {});
RangeImage render_depth(const Mesh& mesh, const Pregrasp& p0, const CameraParams& cam = {},
                        const HandConfig& hand = {});

/// Unit camera-frame ray through the center of pixel (row, col).
Vec3 pixel_ray(const CameraParams& cam, int row, int col);
/// Camera-frame point seen at (row, col) with the given optical depth.
Vec3 unproject(const CameraParams& cam, double row, double col, double depth);
/// Inverse of unproject: (row, col, depth) of a camera-frame point.
Vec3 project(const CameraParams& cam, const Vec3& point);

struct PointCloud {
  std::vector<Vec3> points;  // camera frame
  std::size_t from_image = 0;  // points that came from finite pixels
};

/// Unprojects the finite pixels, then subsamples (seeded, uniform without
/// replacement) or pads with camera-origin points to exactly n points.
PointCloud depth_to_cloud(const RangeImage& img, const CameraParams& cam, int n = 1024,
                          std::uint64_t seed = 0);

/// "GRIM" raster: magic, u32 width, u32 height, row-major little-endian
/// float32 depths with +inf background.
void write_grim(const std::filesystem::path& path, const RangeImage& img);
RangeImage read_grim(const std::filesystem::path& path);

/// 16-bit binary PGM for viewing. Background is 0; finite depths map
/// linearly from the farthest (1) to the nearest (65535) pixel.
void write_pgm(const std::filesystem::path& path, const RangeImage& img);

}  // namespace tgqm
