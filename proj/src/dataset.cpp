#include "tensoraux/errors.hpp"
#include "tensoraux/oracle.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <vector>

namespace tensoraux {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_field(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(line, "not a number: '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) throw ParseError(line, "non-finite value");
  return value;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view content = trim(raw);
    if (content.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = content.find(',', start);
      row.push_back(parse_field(content.substr(start, comma - start), line));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (row.size() < 2) throw ParseError(line, "expected at least one feature and a label");
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw ParseError(line, "expected " + std::to_string(width) + " columns, found " +
                                 std::to_string(row.size()));
    }
    double& label = row.back();
    if (label == 0.0) label = -1.0;
    if (label != 1.0 && label != -1.0) throw ParseError(line, "label must be one of -1, 0, 1");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(line, "empty dataset");

  Dataset data;
  const auto m = static_cast<Index>(rows.size());
  const auto n = static_cast<Index>(width - 1);
  data.features.resize(m, n);
  data.labels.resize(m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) data.features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    data.labels(i) = rows[static_cast<std::size_t>(i)].back();
  }
  return data;
}

Dataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open dataset file " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_dataset_csv(buffer.str());
}

}  // namespace tensoraux
