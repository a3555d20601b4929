#include "synthts/data/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "synthts/core/error.hpp"

namespace synthts::data {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

bool parse_finite(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out, std::chars_format::general);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<double> read_csv_column(const std::filesystem::path& path, std::size_t column, std::size_t skip_rows) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no <= skip_rows) continue;
    std::string_view rest = line;
    if (line_no == 1 && rest.starts_with("\xEF\xBB\xBF")) rest.remove_prefix(3);
    if (trim(rest).empty()) continue;
    std::size_t field = 0;
    std::string_view cell;
    bool found = false;
    for (;;) {
      const auto comma = rest.find(',');
      const auto current = rest.substr(0, comma);
      if (field == column) {
        cell = current;
        found = true;
        break;
      }
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
      ++field;
    }
    std::ostringstream where;
    where << path.string() << ":" << line_no << ": ";
    if (!found) {
      throw DataError(where.str() + "column " + std::to_string(column) + " out of range (row has " +
                      std::to_string(field + 1) + " columns)");
    }
    double v = 0.0;
    if (!parse_finite(cell, v)) {
      throw DataError(where.str() + "non-numeric or non-finite cell '" + std::string(trim(cell)) + "'");
    }
    values.push_back(v);
  }
  return values;
}

}  // namespace synthts::data
