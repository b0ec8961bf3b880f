#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ctmix/changepoint.hpp"
#include "ctmix/errors.hpp"
#include "ctmix/experiments.hpp"
#include "ctmix/version.hpp"

namespace ctmix {

// 17 significant digits: doubles round-trip exactly.
inline std::string format_sig17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Hash of the semantic configuration: sorted key=value lines, excluding
// execution-only keys (threads) so results are comparable across pool sizes.
inline std::uint64_t config_hash(const std::map<std::string, std::string>& config) {
  std::string canon;
  for (const auto& [k, v] : config) {
    if (k == "threads") continue;
    canon += k;
    canon += '=';
    canon += v;
    canon += '\n';
  }
  return fnv1a64(canon);
}

struct OutputMetadata {
  std::string version = kVersion;
  std::uint64_t config_hash = 0;
  std::uint64_t base_seed = 0;
};

inline std::string csv_metadata_header(const OutputMetadata& meta) {
  std::ostringstream os;
  os << "# ctmix_version=" << meta.version << "\n";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(meta.config_hash));
  os << "# config_hash=" << buf << "\n";
  os << "# base_seed=" << meta.base_seed << "\n";
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

// Dataset CSV: metadata comments, then `t,y`, one observation per row.
inline std::string dataset_to_csv(const Dataset& data, const OutputMetadata& meta) {
  data.validate();
  std::string out = csv_metadata_header(meta);
  out += "t,y\n";
  for (std::size_t i = 0; i < data.size(); ++i)
    out += format_sig17(data.t[i]) + "," + format_sig17(data.y[i]) + "\n";
  return out;
}

// Parses a dataset CSV (as written by dataset_to_csv; `#` comment lines are
// skipped). Errors carry 1-based row numbers.
inline Dataset parse_dataset_csv(const std::string& content) {
  Dataset data;
  std::istringstream in(content);
  std::string line;
  std::size_t row = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "t,y")
        throw DataError("row " + std::to_string(row) + ": expected header 't,y', got '" +
                        line + "'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError("row " + std::to_string(row) + ": expected 't,y' pair");
    try {
      std::size_t used = 0;
      const std::string ts = line.substr(0, comma);
      const std::string ys = line.substr(comma + 1);
      const double t = std::stod(ts, &used);
      if (used != ts.size()) throw std::invalid_argument("trailing characters");
      const double y = std::stod(ys, &used);
      if (used != ys.size()) throw std::invalid_argument("trailing characters");
      data.t.push_back(t);
      data.y.push_back(y);
    } catch (const std::exception&) {
      throw DataError("row " + std::to_string(row) + ": malformed number in '" + line + "'");
    }
  }
  if (!header_seen) throw DataError("missing 't,y' header");
  try {
    data.validate();
  } catch (const DataError& e) {
    throw DataError(std::string("dataset invalid: ") + e.what());
  }
  return data;
}

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset_csv(ss.str());
}

// Long-format weight trace: one row per (time, component), plus the tail
// mass of the truncated vector at that time.
struct WeightTraceRow {
  double t = 0.0;
  std::uint64_t j = 0;
  double w = 0.0;
  double tail = 0.0;
};

inline std::string weight_trace_to_csv(std::span<const WeightTraceRow> rows,
                                       const OutputMetadata& meta) {
  std::string out = csv_metadata_header(meta);
  out += "t,j,w,tail\n";
  for (const auto& r : rows)
    out += format_sig17(r.t) + "," + std::to_string(r.j) + "," + format_sig17(r.w) + "," +
           format_sig17(r.tail) + "\n";
  return out;
}

inline std::string figure1_to_csv(std::span<const Figure1Point> points,
                                  const OutputMetadata& meta) {
  std::string out = csv_metadata_header(meta);
  out += "b,l,t,z,log_z\n";
  for (const auto& p : points)
    out += format_sig17(p.b) + "," + std::to_string(p.l) + "," + format_sig17(p.t) + "," +
           std::to_string(p.z) + "," + format_sig17(std::log(static_cast<double>(p.z))) +
           "\n";
  return out;
}

}  // namespace ctmix
