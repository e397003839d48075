#include "tgqm/pipeline/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include <openssl/sha.h>

namespace tgqm {

namespace {

constexpr int kFloatCount = 31;

void put_u16(std::string& buf, std::uint16_t v) {
  buf.push_back(static_cast<char>(v & 0xff));
  buf.push_back(static_cast<char>(v >> 8));
}

void put_u64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& buf, double v) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

float get_f32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return std::bit_cast<float>(v);
}

// The 31 stored values: p0, d, use point, use normal, n_contacts, phi and
// the sum of E_h. The last three slots are reserved and written as zero.
std::array<double, kFloatCount> float_fields(const GraspRecord& r) {
  std::array<double, kFloatCount> f{};
  int k = 0;
  for (double v : r.p0) f[k++] = v;
  for (double v : r.d) f[k++] = v;
  for (int i = 0; i < 3; ++i) f[k++] = r.use_point[i];
  for (int i = 0; i < 3; ++i) f[k++] = r.use_normal[i];
  f[k++] = r.n_contacts;
  for (double v : r.phi.to_array()) f[k++] = v;
  f[k++] = r.phi.effort_hold_sum();
  return f;  // remaining three slots stay zero
}

void set_float_fields(GraspRecord& r, const std::array<double, kFloatCount>& f) {
  int k = 0;
  for (double& v : r.p0) v = f[k++];
  for (double& v : r.d) v = f[k++];
  for (int i = 0; i < 3; ++i) r.use_point[i] = f[k++];
  for (int i = 0; i < 3; ++i) r.use_normal[i] = f[k++];
  r.n_contacts = static_cast<int>(f[k++]);
  std::array<double, 12> phi;
  for (double& v : phi) v = f[k++];
  const MetricVector mv = MetricVector::from_array(phi);
  r.phi.eps = mv.eps;
  r.phi.inertia = mv.inertia;
  r.phi.effort_impact = mv.effort_impact;
  r.phi.effort_hold = mv.effort_hold;
  r.phi.discharge = mv.discharge;
  r.phi.use_force = mv.use_force;
  r.phi.use_geometry = mv.use_geometry;
}

enum Flag : std::uint8_t {
  kReached = 1,
  kUseValid = 2,
  kForceClosure = 4,
  kRankDeficient = 8,
};

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, std::uint64_t row) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw IoError("row " + std::to_string(row) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

DatasetFormat format_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".csv" ? DatasetFormat::Csv : DatasetFormat::Binary;
}

std::string hex(const std::uint8_t* bytes, std::size_t n) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back(digits[bytes[i] >> 4]);
    s.push_back(digits[bytes[i] & 15]);
  }
  return s;
}

std::array<std::uint8_t, 16> object_hash(const std::string& object_id) {
  unsigned char md[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(object_id.data()), object_id.size(), md);
  std::array<std::uint8_t, 16> out;
  std::memcpy(out.data(), md, out.size());
  return out;
}

std::string record_hash(const GraspRecord& r) {
  std::string buf = r.object_id;
  buf.push_back('\0');
  for (double v : r.p0) put_f32(buf, v);
  for (double v : r.d) put_f32(buf, v);
  unsigned char md[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(buf.data()), buf.size(), md);
  return hex(md, 8);
}

const std::string& csv_header() {
  static const std::string h =
      "object_id,p0_0,p0_1,p0_2,p0_3,p0_4,p0_5,d_0,d_1,u_x,u_y,u_z,un_x,un_y,un_z,n_contacts,"
      "eps,inertia,e_i,e_h_0,e_h_1,e_h_2,e_h_3,e_h_4,e_h_5,delta,u_tau,u_g,reached,viable";
  return h;
}

std::string to_csv_row(const GraspRecord& r) {
  std::string s = r.object_id;
  auto add = [&](double v) {
    s.push_back(',');
    s += format_double(v);
  };
  for (double v : r.p0) add(v);
  for (double v : r.d) add(v);
  for (int i = 0; i < 3; ++i) add(r.use_point[i]);
  for (int i = 0; i < 3; ++i) add(r.use_normal[i]);
  s += ',' + std::to_string(r.n_contacts);
  for (double v : r.phi.to_array()) add(v);
  s += r.reached ? ",1" : ",0";
  s += r.viable ? ",1" : ",0";
  return s;
}

DatasetWriter::DatasetWriter(const std::filesystem::path& path, DatasetFormat format)
    : path_(path), format_(format), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  if (format_ == DatasetFormat::Csv) {
    out_ << csv_header() << '\n';
  } else {
    std::string header = "TGQM";
    put_u16(header, kBinaryVersion);
    put_u64(header, 0);
    out_.write(header.data(), static_cast<std::streamsize>(header.size()));
  }
  if (!out_) throw IoError("write failed on " + path.string());
}

DatasetWriter::~DatasetWriter() {
  try {
    close();
  } catch (...) {
  }
}

void DatasetWriter::write(const GraspRecord& r) {
  if (closed_) throw IoError("writer already closed");
  if (format_ == DatasetFormat::Csv) {
    out_ << to_csv_row(r) << '\n';
  } else {
    std::string rec;
    rec.reserve(kBinaryRecordSize);
    const auto h = object_hash(r.object_id);
    rec.append(reinterpret_cast<const char*>(h.data()), h.size());
    for (double v : float_fields(r)) put_f32(rec, v);
    std::uint8_t flags = 0;
    if (r.reached) flags |= kReached;
    if (r.use_valid()) flags |= kUseValid;
    if (r.phi.force_closure) flags |= kForceClosure;
    if (r.phi.use_rank_deficient) flags |= kRankDeficient;
    rec.push_back(static_cast<char>(flags));
    rec.push_back(static_cast<char>(r.viable ? 1 : 0));
    rec.resize(kBinaryRecordSize, '\0');
    out_.write(rec.data(), static_cast<std::streamsize>(rec.size()));
  }
  if (!out_) throw IoError("write failed on " + path_.string());
  ++count_;
}

void DatasetWriter::close() {
  if (closed_) return;
  closed_ = true;
  if (format_ == DatasetFormat::Binary) {
    std::string n;
    put_u64(n, count_);
    out_.seekp(6);
    out_.write(n.data(), 8);
  }
  out_.close();
  if (out_.fail()) throw IoError("write failed on " + path_.string());
}

ObjectIdLookup make_id_lookup(const std::vector<std::string>& ids) {
  ObjectIdLookup m;
  for (const auto& id : ids) m[object_hash(id)] = id;
  return m;
}

void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const GraspRecord&)>& fn, const ObjectIdLookup& ids) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  const bool binary = in.gcount() == 4 && std::memcmp(magic, "TGQM", 4) == 0;
  in.clear();
  in.seekg(0);

  if (binary) {
    unsigned char header[14];
    in.read(reinterpret_cast<char*>(header), sizeof header);
    if (in.gcount() != sizeof header) throw IoError("truncated header in " + path.string());
    const unsigned version = header[4] | (header[5] << 8);
    if (version != kBinaryVersion) throw IoError("unsupported dataset version " + std::to_string(version));
    const std::uint64_t count = get_u64(header + 6);
    unsigned char rec[kBinaryRecordSize];
    for (std::uint64_t i = 0; i < count; ++i) {
      in.read(reinterpret_cast<char*>(rec), kBinaryRecordSize);
      if (static_cast<std::size_t>(in.gcount()) != kBinaryRecordSize) {
        throw IoError("truncated record " + std::to_string(i) + " in " + path.string());
      }
      GraspRecord r;
      std::array<std::uint8_t, 16> h;
      std::memcpy(h.data(), rec, 16);
      const auto it = ids.find(h);
      r.object_id = it != ids.end() ? it->second : hex(h.data(), h.size());
      r.index = i;
      std::array<double, kFloatCount> f;
      for (int k = 0; k < kFloatCount; ++k) f[k] = get_f32(rec + 16 + 4 * k);
      set_float_fields(r, f);
      const std::uint8_t flags = rec[16 + 4 * kFloatCount];
      r.reached = flags & kReached;
      r.phi.use_valid = flags & kUseValid;
      r.phi.force_closure = flags & kForceClosure;
      r.phi.use_rank_deficient = flags & kRankDeficient;
      r.viable = rec[17 + 4 * kFloatCount] != 0;
      fn(r);
    }
    return;
  }

  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header()) throw IoError("unexpected CSV header in " + path.string());
  std::uint64_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 30) {
      throw IoError("row " + std::to_string(row) + ": expected 30 columns, got " +
                    std::to_string(cells.size()));
    }
    GraspRecord r;
    r.object_id = cells[0];
    r.index = row;
    std::array<double, kFloatCount> f{};
    for (int k = 0; k < 27; ++k) f[k] = parse_double(cells[1 + k], row);
    set_float_fields(r, f);
    auto flag = [&](const std::string& s) {
      if (s != "0" && s != "1") throw IoError("row " + std::to_string(row) + ": bad flag '" + s + "'");
      return s == "1";
    };
    r.reached = flag(cells[28]);
    r.viable = flag(cells[29]);
    r.phi.use_valid = r.use_valid();
    r.phi.force_closure = r.phi.eps > 0;
    fn(r);
    ++row;
  }
}

std::vector<GraspRecord> read_dataset(const std::filesystem::path& path, const ObjectIdLookup& ids) {
  std::vector<GraspRecord> out;
  for_each_record(path, [&](const GraspRecord& r) { out.push_back(r); }, ids);
  return out;
}

GraspRecord quantize_float32(const GraspRecord& r) {
  GraspRecord q = r;
  std::array<double, kFloatCount> f = float_fields(r);
  for (double& v : f) v = static_cast<float>(v);
  set_float_fields(q, f);
  return q;
}

}  // namespace tgqm
