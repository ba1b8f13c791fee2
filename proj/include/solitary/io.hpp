#pragma once

// Output helpers: 17-significant-digit CSV, JSON files, raw field snapshots.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "solitary/error.hpp"
#include "solitary/grid.hpp"

namespace solitary {

using json = nlohmann::json;

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
    require(out_.good(), ErrorKind::InvalidInput, "cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt17(values[i]);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

/// JSON with doubles printed to 17 significant digits.
inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  require(out.good(), ErrorKind::InvalidInput, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

inline json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::InvalidInput, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidInput, path.string() + ": " + e.what());
  }
}

inline json grid_to_json(const GridSpec& g) {
  return json{{"dim", g.dim}, {"n", g.n}, {"L", g.L},
              {"center", std::vector<double>(g.center.begin(), g.center.begin() + g.dim)}};
}

/// Writes `<base>.bin` (interleaved re/im float64, little-endian, row-major
/// with axis 0 slowest) and `<base>.json` describing the grid.
inline void write_field_snapshot(const std::filesystem::path& base, const ComplexField& f, double t) {
  static_assert(sizeof(cplx) == 2 * sizeof(double));
  auto bin = base;
  bin += ".bin";
  std::ofstream out(bin, std::ios::binary);
  require(out.good(), ErrorKind::InvalidInput, "cannot open " + bin.string() + " for writing");
  out.write(reinterpret_cast<const char*>(f.data.data()),
            static_cast<std::streamsize>(f.data.size() * sizeof(cplx)));
  json header = grid_to_json(f.grid);
  header["t"] = t;
  header["dtype"] = "complex128-le";
  header["layout"] = "row-major, axis 0 slowest, interleaved re/im";
  auto meta = base;
  meta += ".json";
  write_json(meta, header);
}

inline ComplexField read_field_snapshot(const std::filesystem::path& base) {
  auto meta = base;
  meta += ".json";
  const json h = read_json(meta);
  GridSpec g;
  g.dim = h.at("dim");
  g.n = h.at("n");
  g.L = h.at("L");
  const auto c = h.at("center").get<std::vector<double>>();
  for (int a = 0; a < g.dim; ++a) g.center[a] = c.at(a);
  ComplexField f(g);
  auto bin = base;
  bin += ".bin";
  std::ifstream in(bin, std::ios::binary);
  require(in.good(), ErrorKind::InvalidInput, "cannot read " + bin.string());
  in.read(reinterpret_cast<char*>(f.data.data()), static_cast<std::streamsize>(f.data.size() * sizeof(cplx)));
  require(in.gcount() == static_cast<std::streamsize>(f.data.size() * sizeof(cplx)),
          ErrorKind::InvalidInput, "field snapshot is truncated");
  return f;
}

}  // namespace solitary
