#pragma once

#include <charconv>
#include <complex>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "red/error.hpp"

// Plain-text output: CSV with shortest round-trip numbers, JSON via nlohmann.
// No timestamps or host data anywhere, so reruns are byte-identical.

namespace red::harness {

/// Shortest decimal that parses back to exactly `v`.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  void row(std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
    out_ << '\n';
    if (!out_) throw Error("write failed");
  }
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }

 private:
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  long index_of(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<long>(i);
    return -1;
  }
};

/// Reads a numeric CSV with a header row. `where` prefixes error messages.
inline CsvTable read_csv(const std::filesystem::path& path, const std::string& where) {
  std::ifstream in(path);
  if (!in) throw ConfigError(where, "cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(where, "empty file " + path.string());
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      auto comma = s.find(',', start);
      auto cell = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      out.push_back(cell);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return out;
  };
  t.header = split(line);
  t.columns.resize(t.header.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw ConfigError(where, red::detail::concat(path.string(), " line ", row, ": expected ", t.header.size(), " columns"));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      auto res = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
      if (res.ec != std::errc() || res.ptr != cells[c].data() + cells[c].size())
        throw ConfigError(where, red::detail::concat(path.string(), " line ", row, ": not a number: ", cells[c]));
      t.columns[c].push_back(v);
    }
  }
  return t;
}

inline void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

inline std::string snapshot_name(const std::string& stem, long index, const std::string& ext) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06ld", index);
  return stem + "_" + buf + ext;
}

}  // namespace red::harness
