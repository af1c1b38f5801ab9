#pragma once

// Recorded metric streams and their CSV form.

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dcpf/error.hpp"

namespace dcpf {

enum class Subproblem { lmo, projection };

inline std::string_view to_string(Subproblem s) { return s == Subproblem::lmo ? "lmo" : "projection"; }

struct SubproblemTiming {
  Subproblem kind;
  double nanoseconds;  // mean per call over the recording interval
};

struct RunRecord {
  std::vector<double> times;
  std::vector<double> consensus_err;
  std::vector<double> tracking_err;
  std::vector<double> optimality_gap;
  std::vector<double> fw_gap;
  // Not part of the CSV: step counter and elapsed wall-clock per sample.
  std::vector<long> iterations;
  std::vector<double> wall_seconds;
  std::vector<SubproblemTiming> subproblem_timings;
  std::string config_echo;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
};

inline constexpr std::array<std::string_view, 5> kRunCsvColumns = {"t", "consensus_err", "tracking_err",
                                                                   "optimality_gap", "fw_gap"};

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError("malformed number in CSV: '" + std::string(text) + "'");
  }
  return value;
}

inline std::string to_csv(const RunRecord& rec) {
  std::string out;
  for (std::size_t c = 0; c < kRunCsvColumns.size(); ++c) {
    if (c) out += ',';
    out += kRunCsvColumns[c];
  }
  out += '\n';
  for (std::size_t k = 0; k < rec.size(); ++k) {
    for (const auto* col : {&rec.times, &rec.consensus_err, &rec.tracking_err, &rec.optimality_gap, &rec.fw_gap}) {
      if (col != &rec.times) out += ',';
      out += format_double((*col)[k]);
    }
    out += '\n';
  }
  return out;
}

inline RunRecord parse_csv(std::string_view text) {
  RunRecord rec;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != kRunCsvColumns.size()) throw ConfigError("CSV row has wrong number of fields");
    if (header) {
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (fields[c] != kRunCsvColumns[c]) throw ConfigError("unexpected CSV header");
      }
      header = false;
      continue;
    }
    rec.times.push_back(parse_double(fields[0]));
    rec.consensus_err.push_back(parse_double(fields[1]));
    rec.tracking_err.push_back(parse_double(fields[2]));
    rec.optimality_gap.push_back(parse_double(fields[3]));
    rec.fw_gap.push_back(parse_double(fields[4]));
  }
  if (header) throw ConfigError("CSV is missing its header");
  return rec;
}

inline void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << contents;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace dcpf
