#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "perturbreg/grid_function.hpp"

namespace perturbreg::io {

class CsvError : public std::runtime_error {
 public:
  enum class Kind { malformed, non_uniform };

  CsvError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Shortest decimal that round-trips to the same double (at most 17 significant digits).
inline std::string format_real(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

inline double parse_real(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    throw CsvError(CsvError::Kind::malformed, "not a finite number: '" + std::string(text) + "'");
  return value;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
};

/// Numeric CSV with a header row; every row must have the header's width.
inline Table read_table(std::istream& in) {
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw CsvError(CsvError::Kind::malformed, "empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  for (auto field : split_fields(line)) table.header.emplace_back(field);
  table.columns.resize(table.header.size());
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (fields.size() != table.header.size())
      throw CsvError(CsvError::Kind::malformed, "row " + std::to_string(row) + " has the wrong number of fields");
    for (std::size_t c = 0; c < fields.size(); ++c) table.columns[c].push_back(parse_real(fields[c]));
  }
  return table;
}

/// Reads a `t,y` CSV into a grid function. t must be strictly increasing with
/// uniform spacing (relative tolerance 1e-9 on each step).
inline GridFunction read_samples(std::istream& in) {
  auto table = read_table(in);
  if (table.header.size() != 2 || table.header[0] != "t" || table.header[1] != "y")
    throw CsvError(CsvError::Kind::malformed, "expected header 't,y'");
  const auto& t = table.columns[0];
  if (t.size() < 2) throw CsvError(CsvError::Kind::malformed, "need at least two samples");
  const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw CsvError(CsvError::Kind::non_uniform, "t is not strictly increasing");
    if (std::abs((t[i] - t[i - 1]) - h) > 1e-9 * h) throw CsvError(CsvError::Kind::non_uniform, "t is not uniformly spaced");
  }
  return GridFunction(t.front(), t.back(), std::move(table.columns[1]));
}

inline GridFunction read_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(CsvError::Kind::malformed, "cannot open " + path.string());
  return read_samples(in);
}

inline void write_table(std::ostream& out, const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& columns) {
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_real(columns[c][r]);
    out << '\n';
  }
}

/// Writes to a sibling temporary and renames it over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline void write_table_file(const std::filesystem::path& path, const std::vector<std::string>& header,
                             const std::vector<std::vector<double>>& columns) {
  std::ostringstream out;
  write_table(out, header, columns);
  write_file_atomic(path, out.str());
}

}  // namespace perturbreg::io
