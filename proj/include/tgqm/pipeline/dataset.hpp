#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "tgqm/geom/io.hpp"
#include "tgqm/geom/mesh.hpp"
#include "tgqm/metrics/metrics.hpp"

namespace tgqm {

/// One dataset row. Use point and normal are NaN when the use ray missed.
struct GraspRecord {
  std::string object_id;
  std::uint64_t index = 0;  // position in the generating run
  std::array<double, 6> p0{};
  std::array<double, 2> d{};
  Vec3 use_point = Vec3::Zero();
  Vec3 use_normal = Vec3::Zero();
  int n_contacts = 0;
  MetricVector phi;
  bool reached = false;
  bool viable = false;

  bool use_valid() const { return !std::isnan(use_point.x()); }
};

enum class DatasetFormat { Csv, Binary };

/// ".csv" selects CSV; anything else is binary.
DatasetFormat format_for_path(const std::filesystem::path& path);

/// First 16 bytes of SHA-256 over the object id.
std::array<std::uint8_t, 16> object_hash(const std::string& object_id);
/// 16 hex digits of SHA-256 over the object id and the float32 little-endian
/// bytes of p0 and d. CSV and binary copies of a record hash identically.
std::string record_hash(const GraspRecord& r);

std::string hex(const std::uint8_t* bytes, std::size_t n);

/// CSV header line (no newline).
const std::string& csv_header();
std::string to_csv_row(const GraspRecord& r);

/// Size of one binary record in bytes.
inline constexpr std::size_t kBinaryRecordSize = 148;
inline constexpr std::uint16_t kBinaryVersion = 1;

/// Streams records to disk. Binary files get their record count patched in
/// on close(); the destructor closes quietly.
class DatasetWriter {
 public:
  DatasetWriter(const std::filesystem::path& path, DatasetFormat format);
  ~DatasetWriter();
  DatasetWriter(const DatasetWriter&) = delete;
  DatasetWriter& operator=(const DatasetWriter&) = delete;

  void write(const GraspRecord& r);
  void close();
  std::uint64_t count() const { return count_; }

 private:
  std::filesystem::path path_;
  DatasetFormat format_;
  std::ofstream out_;
  std::uint64_t count_ = 0;
  bool closed_ = false;
};

/// Maps binary object-id hashes back to names; unknown hashes read as hex.
using ObjectIdLookup = std::map<std::array<std::uint8_t, 16>, std::string>;
ObjectIdLookup make_id_lookup(const std::vector<std::string>& ids);

/// Reads CSV or binary (detected from the "TGQM" magic) and calls `fn` per
/// record. `index` is the row position. Throws IoError on malformed input.
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const GraspRecord&)>& fn,
                     const ObjectIdLookup& ids = {});
std::vector<GraspRecord> read_dataset(const std::filesystem::path& path,
                                      const ObjectIdLookup& ids = {});

/// Rounds every stored value the way the binary format does, so a record
/// can be compared against what a binary file would hold.
GraspRecord quantize_float32(const GraspRecord& r);

}  // namespace tgqm
