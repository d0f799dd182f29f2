#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqglab/grid.hpp"
#include "sqglab/solver.hpp"

namespace sqglab::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
inline void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}
inline void put_f64(std::string& out, double x) {
  std::uint64_t v;
  std::memcpy(&v, &x, sizeof v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}
inline std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
  return v;
}
inline double get_f64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + b])) << (8 * b);
  double x;
  std::memcpy(&x, &v, sizeof x);
  return x;
}

}  // namespace detail

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 4 + 4 + 4 + 4 + 8 + 8;

struct SnapshotMeta {
  double alpha = 0.0;
  double time = 0.0;
};

/// "SQG1", u32 version, u32 d, u32 N, f64 alpha, f64 time, N^d f64 values
/// (x1 fastest), all little-endian.
inline std::string encode_snapshot(const GridField& f, const SnapshotMeta& meta) {
  std::string out = "SQG1";
  detail::put_u32(out, kSnapshotVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(f.grid().dim()));
  detail::put_u32(out, static_cast<std::uint32_t>(f.grid().n()));
  detail::put_f64(out, meta.alpha);
  detail::put_f64(out, meta.time);
  for (double v : f.values()) detail::put_f64(out, v);
  return out;
}

struct LoadedSnapshot {
  GridField field;
  SnapshotMeta meta;
};

inline LoadedSnapshot decode_snapshot(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "SQG1") != 0) throw FormatError("snapshot: bad magic");
  if (bytes.size() < kSnapshotHeaderBytes) throw FormatError("snapshot: truncated header");
  const std::uint32_t version = detail::get_u32(bytes, 4);
  if (version != kSnapshotVersion) throw FormatError("snapshot: version mismatch (file " + std::to_string(version) + ")");
  const std::uint32_t d = detail::get_u32(bytes, 8), n = detail::get_u32(bytes, 12);
  TorusGrid g;
  try {
    g = TorusGrid(static_cast<int>(d), static_cast<int>(n));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("snapshot: invalid grid: ") + e.what());
  }
  const std::size_t need = kSnapshotHeaderBytes + 8 * g.size();
  if (bytes.size() < need) throw FormatError("snapshot: truncated data");
  if (bytes.size() > need) throw FormatError("snapshot: trailing bytes");
  LoadedSnapshot s{GridField(g), {detail::get_f64(bytes, 16), detail::get_f64(bytes, 24)}};
  for (std::size_t i = 0; i < g.size(); ++i) s.field[i] = detail::get_f64(bytes, kSnapshotHeaderBytes + 8 * i);
  return s;
}

inline void write_snapshot(const std::filesystem::path& path, const GridField& f, const SnapshotMeta& meta) {
  atomic_write(path, encode_snapshot(f, meta));
}

inline LoadedSnapshot read_snapshot(const std::filesystem::path& path) { return decode_snapshot(read_file(path)); }

inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Time series table: `# key=value` header lines, then
/// t,linf,l2,lq,mean,holder_lp,dt_used.
inline std::string encode_timeseries(const std::vector<std::string>& header, const std::vector<SeriesRow>& rows,
                                     const std::vector<double>& holder_lp) {
  std::string out;
  for (const auto& h : header) out += "# " + h + "\n";
  out += "t,linf,l2,lq,mean,holder_lp,dt_used\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double hl = i < holder_lp.size() ? holder_lp[i] : 0.0;
    out += csv_number(r.t) + "," + csv_number(r.linf) + "," + csv_number(r.l2) + "," + csv_number(r.lq) + "," +
           csv_number(r.mean) + "," + csv_number(hl) + "," + csv_number(r.dt_used) + "\n";
  }
  return out;
}

}  // namespace sqglab::io
