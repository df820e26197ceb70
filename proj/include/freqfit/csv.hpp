#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "freqfit/errors.hpp"
#include "freqfit/goodness_of_fit.hpp"

namespace freqfit {

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline bool is_blank_or_comment(const std::string& line) {
  for (char ch : line) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    return ch == '#';
  }
  return true;
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

inline double parse_real(const std::string& field, int row, int col) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (end == begin || (end && *end != '\0') || !std::isfinite(v))
    throw data_error("row " + std::to_string(row) + ", column " + std::to_string(col) +
                     ": not a finite number: '" + field + "'");
  return v;
}

inline long long parse_integer(const std::string& field, int row, int col) {
  std::string trimmed;
  for (char ch : field)
    if (!std::isspace(static_cast<unsigned char>(ch))) trimmed += ch;
  if (trimmed.empty())
    throw data_error("row " + std::to_string(row) + ", column " + std::to_string(col) +
                     ": empty cell");
  for (std::size_t i = 0; i < trimmed.size(); ++i) {
    const char ch = trimmed[i];
    if (i == 0 && (ch == '+' || ch == '-')) continue;
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw data_error("row " + std::to_string(row) + ", column " + std::to_string(col) +
                       ": not an integer: '" + field + "'");
  }
  try {
    return std::stoll(trimmed);
  } catch (const std::out_of_range&) {
    throw data_error("row " + std::to_string(row) + ", column " + std::to_string(col) +
                     ": integer out of range: '" + field + "'");
  }
}

}  // namespace detail

// One real per line; blank lines and '#' comment lines are skipped.
inline std::vector<double> parse_sample_csv(std::istream& in) {
  std::vector<double> out;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (detail::is_blank_or_comment(line)) continue;
    out.push_back(detail::parse_real(line, row, 1));
  }
  return out;
}

// Plain integers, comma-separated, one table row per line, no header.
inline ContingencyTable parse_table_csv(std::istream& in) {
  std::vector<std::vector<long long>> rows;
  std::string line;
  int row = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++row;
    if (detail::is_blank_or_comment(line)) continue;
    const auto fields = detail::split_fields(line);
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw data_error("row " + std::to_string(row) + ": ragged row with " +
                       std::to_string(fields.size()) + " cells, expected " +
                       std::to_string(width));
    std::vector<long long> parsed;
    parsed.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      parsed.push_back(detail::parse_integer(fields[c], row, static_cast<int>(c) + 1));
    rows.push_back(std::move(parsed));
  }
  if (rows.empty()) throw data_error("table CSV contains no data rows");
  try {
    return ContingencyTable(std::move(rows));
  } catch (const std::domain_error& e) {
    throw data_error(e.what());
  }
}

struct DecomposeColumns {
  std::vector<double> observed;
  std::vector<double> theoretical;
  std::vector<double> estimated;
};

// Three aligned comma-separated columns: observed, theoretical, estimated.
inline DecomposeColumns parse_columns_csv(std::istream& in) {
  DecomposeColumns out;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (detail::is_blank_or_comment(line)) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != 3)
      throw data_error("row " + std::to_string(row) + ": expected 3 columns, got " +
                       std::to_string(fields.size()));
    out.observed.push_back(detail::parse_real(fields[0], row, 1));
    out.theoretical.push_back(detail::parse_real(fields[1], row, 2));
    out.estimated.push_back(detail::parse_real(fields[2], row, 3));
  }
  if (out.observed.empty()) throw data_error("decompose CSV contains no data rows");
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open input file: " + path);
  return in;
}

}  // namespace freqfit
