#include "mmboot/csv.hpp"

#include <charconv>
#include <fstream>
#include <optional>

#include "mmboot/errors.hpp"

namespace mmboot {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& field, std::size_t line_no, const std::string& column) {
  const std::string t = trim(field);
  double value = 0.0;
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (t.empty() || ec != std::errc() || ptr != end) {
    fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": column '" + column +
                                     "' is not a number: '" + t + "'");
  }
  return value;
}

}  // namespace

std::vector<std::string> split_csv_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          current.push_back('"');
          ++k;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::vector<Observation> read_observations_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) fail(ErrorCode::parse_error, "empty input: missing header");

  const auto header = split_csv_record(line);
  std::optional<std::size_t> cluster_col, y_col, s_col;
  std::vector<std::size_t> x_cols;
  for (std::size_t k = 0; k < header.size(); ++k) {
    const std::string name = trim(header[k]);
    if (name == "cluster") {
      cluster_col = k;
    } else if (name == "y") {
      y_col = k;
    } else if (name == "s") {
      s_col = k;
    } else if (name.size() > 1 && name[0] == 'x') {
      x_cols.push_back(k);
    } else {
      fail(ErrorCode::parse_error, "unexpected header column '" + name + "'");
    }
  }
  if (!cluster_col || !y_col) fail(ErrorCode::parse_error, "header must contain 'cluster' and 'y'");
  if (x_cols.empty()) fail(ErrorCode::parse_error, "header must contain at least one x column");

  std::vector<Observation> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_record(line);
    if (fields.size() != header.size()) {
      fail(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(header.size()) + " fields, got " +
                                       std::to_string(fields.size()));
    }
    Observation o;
    o.cluster = trim(fields[*cluster_col]);
    o.y = parse_number(fields[*y_col], line_no, "y");
    o.s = s_col ? parse_number(fields[*s_col], line_no, "s") : 1.0;
    o.x.resize(static_cast<Index>(x_cols.size()));
    for (std::size_t k = 0; k < x_cols.size(); ++k) {
      o.x(static_cast<Index>(k)) = parse_number(fields[x_cols[k]], line_no, trim(header[x_cols[k]]));
    }
    rows.push_back(std::move(o));
  }
  return rows;
}

Dataset read_dataset_csv(std::istream& in) {
  const auto rows = read_observations_csv(in);
  return build_dataset(rows);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::parse_error, "cannot open '" + path.string() + "'");
  return read_dataset_csv(in);
}

}  // namespace mmboot
