#include "dvqn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "dvqn/errors.hpp"

namespace dvqn {

namespace {

constexpr char kMagic[4] = {'D', 'V', 'Q', 'N'};

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 4);
}

void put_f64(std::ostream& out, double d) {
  const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw ConfigError("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw ConfigError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<CheckpointRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("checkpoint: cannot open " + path + " for writing");
  out.write(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(records.size()));
  for (const auto& rec : records) {
    std::size_t expect = 1;
    for (auto d : rec.shape) expect *= d;
    if (rec.shape.empty()) expect = 0;
    if (expect != rec.values.size())
      throw StructuralError("checkpoint: shape/value mismatch for record " + rec.name);
    for (double v : rec.values)
      if (!std::isfinite(v))
        throw NumericalError("checkpoint: non-finite value in record " + rec.name);
    put_u32(out, static_cast<std::uint32_t>(rec.name.size()));
    out.write(rec.name.data(), static_cast<std::streamsize>(rec.name.size()));
    put_u32(out, static_cast<std::uint32_t>(rec.shape.size()));
    for (auto d : rec.shape) put_u32(out, d);
    for (double v : rec.values) put_f64(out, v);
  }
  if (!out) throw ConfigError("checkpoint: write failed for " + path);
}

std::vector<CheckpointRecord> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw ConfigError("checkpoint: bad magic in " + path);
  const std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion)
    throw ConfigError("checkpoint: unsupported version " + std::to_string(version));
  const std::uint32_t count = get_u32(in);
  std::vector<CheckpointRecord> records;
  records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointRecord rec;
    const std::uint32_t name_len = get_u32(in);
    rec.name.resize(name_len);
    in.read(rec.name.data(), name_len);
    if (!in) throw ConfigError("checkpoint: truncated record name");
    const std::uint32_t ndim = get_u32(in);
    rec.shape.resize(ndim);
    std::size_t total = ndim == 0 ? 0 : 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      rec.shape[d] = get_u32(in);
      total *= rec.shape[d];
    }
    rec.values.resize(total);
    for (std::size_t v = 0; v < total; ++v) rec.values[v] = get_f64(in);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<CheckpointRecord> params_to_records(const ParamSet& params) {
  std::vector<CheckpointRecord> records;
  records.reserve(params.size());
  for (const auto& name : params.names()) {
    const Matrix& m = params.at(name);
    CheckpointRecord rec;
    rec.name = name;
    if (m.cols() == 1) {
      rec.shape = {static_cast<std::uint32_t>(m.rows())};
    } else {
      rec.shape = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    }
    rec.values.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) rec.values.push_back(m(r, c));
    records.push_back(std::move(rec));
  }
  return records;
}

void records_to_params(const std::vector<CheckpointRecord>& records, ParamSet& params) {
  for (const auto& rec : records) {
    if (rec.name.rfind("__", 0) == 0) continue;  // metadata records
    Eigen::Index rows, cols;
    if (rec.shape.size() == 1) {
      rows = rec.shape[0];
      cols = 1;
    } else if (rec.shape.size() == 2) {
      rows = rec.shape[0];
      cols = rec.shape[1];
    } else {
      throw ConfigError("checkpoint: unsupported rank for record " + rec.name);
    }
    Matrix m(rows, cols);
    std::size_t idx = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rec.values[idx++];
    if (params.contains(rec.name)) {
      Matrix& dst = params.at(rec.name);
      if (dst.rows() != rows || dst.cols() != cols)
        throw StructuralError("checkpoint: shape mismatch loading " + rec.name);
      dst = std::move(m);
    } else {
      params.add(rec.name, std::move(m));
    }
  }
}

std::uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("digest: cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  return h;
}

}  // namespace dvqn
