#pragma once

// Minimal RFC-4180-style reader for a single numeric column, plus the
// number formatting shared by every CSV the CLI writes.

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "garmagarch/errors.hpp"

namespace garmagarch {

namespace detail {

/// Splits one record. Quoted fields may contain commas and doubled quotes;
/// embedded newlines are not supported.
inline std::vector<std::string> split_record(std::string_view line, std::size_t row) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else {
      fields.back() += ch;
    }
  }
  if (quoted) throw DataError("row " + std::to_string(row) + ": unterminated quoted field");
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

/// Whole-field parse; nullopt on any trailing garbage.
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline bool is_missing(std::string_view s) {
  s = trim(s);
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "null";
}

}  // namespace detail

/// Shortest round-trip decimal form of x; "nan", "inf" and "-inf" otherwise.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return {buf.data(), res.ptr};
}

/// Reads one column from a CSV file and multiplies it by `scale`.
///
/// The first row is a header when any of its fields fails to parse as a
/// number. `column` names a header field, or else is a 0-based index. Rows
/// are numbered from 1 in error messages, counting the header. Blank lines
/// are skipped; a missing or non-numeric cell in the selected column is a
/// DataError. Support checks for a family happen at fit time.
inline std::vector<double> ingest_csv(const std::string& path, const std::string& column = "0", double scale = 1.0) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("scale must be positive and finite");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path + "'");

  std::vector<double> out;
  std::optional<std::size_t> col;
  std::string line;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (row == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_record(line, row);

    if (first) {
      first = false;
      bool header = false;
      for (const auto& f : fields) header = header || !detail::parse_double(f);
      if (header) {
        for (std::size_t j = 0; j < fields.size(); ++j) {
          if (detail::trim(fields[j]) == column) col = j;
        }
        if (!col) {
          const auto idx = detail::parse_double(column);
          if (!idx || *idx < 0 || *idx != std::floor(*idx) || *idx >= static_cast<double>(fields.size())) {
            throw DataError("column '" + column + "' not found in header");
          }
          col = static_cast<std::size_t>(*idx);
        }
        continue;
      }
      const auto idx = detail::parse_double(column);
      if (!idx || *idx < 0 || *idx != std::floor(*idx)) {
        throw DataError("column '" + column + "' is not an index and the file has no header");
      }
      col = static_cast<std::size_t>(*idx);
    }

    if (*col >= fields.size()) {
      throw DataError("row " + std::to_string(row) + ": missing value in column " + std::to_string(*col));
    }
    const std::string& cell = fields[*col];
    if (detail::is_missing(cell)) {
      throw DataError("row " + std::to_string(row) + ": missing value in column " + std::to_string(*col));
    }
    const auto v = detail::parse_double(cell);
    if (!v || !std::isfinite(*v)) {
      throw DataError("row " + std::to_string(row) + ": non-numeric value '" + cell + "'");
    }
    out.push_back(*v * scale);
  }
  if (out.empty()) throw DataError("input file '" + path + "' has no observations");
  return out;
}

}  // namespace garmagarch
