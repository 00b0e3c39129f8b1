#include "gofscreen/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "gofscreen/error.hpp"

namespace gofscreen {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& text, double& value) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

}  // namespace

CsvTable parse_csv(std::istream& in, bool has_header) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool in_quotes = false;
  bool field_started = false;
  bool pending = false;  // characters seen since the last record ended

  const auto end_record = [&] {
    record.push_back(field);
    field.clear();
    field_started = false;
    const bool blank = record.size() == 1 && trim(record[0]).empty();
    if (!blank) {
      if (has_header && table.header.empty() && table.rows.empty()) {
        table.header = record;
      } else {
        table.rows.push_back(record);
        table.lines.push_back(record_line);
      }
    }
    record.clear();
    pending = false;
  };

  char ch;
  while (in.get(ch)) {
    if (!pending) {
      record_line = line;
      pending = true;
    }
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started && !trim(field).empty()) {
          throw ParseError("unexpected quote inside an unquoted field", line);
        }
        field.clear();
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(field);
        field.clear();
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(ch);
        field_started = true;
        break;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", record_line);
  if (pending) end_record();

  const std::size_t width =
      !table.header.empty() ? table.header.size()
                            : (table.rows.empty() ? 0 : table.rows.front().size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() != width) {
      throw ParseError("expected " + std::to_string(width) + " fields, found " +
                           std::to_string(table.rows[r].size()),
                       table.lines[r]);
    }
  }
  return table;
}

Dataset dataset_from_table(const CsvTable& table, const std::string& response_column) {
  const std::size_t width =
      !table.header.empty() ? table.header.size()
                            : (table.rows.empty() ? 0 : table.rows.front().size());
  if (table.rows.empty()) throw DataError("input has no data rows");
  if (width < 2) throw DataError("input needs a response and at least one covariate");

  std::size_t response = width;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (trim(table.header[c]) == trim(response_column)) response = c;
  }
  if (response == width) {
    double number;
    if (parse_double(response_column, number) && number >= 1 && number <= width &&
        number == std::floor(number)) {
      response = static_cast<std::size_t>(number) - 1;
    } else {
      throw DataError("response column '" + response_column + "' not found");
    }
  }

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Dataset data;
  data.x.resize(n, static_cast<Eigen::Index>(width - 1));
  data.y.resize(n);
  for (std::size_t c = 0; c < width; ++c) {
    if (c == response) continue;
    data.column_names.push_back(table.header.empty() ? "x" + std::to_string(c + 1)
                                                     : trim(table.header[c]));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < width; ++c) {
      double value;
      if (!parse_double(row[c], value)) {
        throw ParseError("non-numeric value '" + row[c] + "' in column " +
                             std::to_string(c + 1) +
                             (table.header.empty() ? "" : " (" + trim(table.header[c]) + ")"),
                         table.lines[static_cast<std::size_t>(i)]);
      }
      if (c == response) {
        data.y[i] = value;
      } else {
        data.x(i, col++) = value;
      }
    }
  }
  data.response_kind = infer_response_kind(data.response());
  return data;
}

Dataset load_csv(const std::string& path, const std::string& response_column,
                 bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return dataset_from_table(parse_csv(in, has_header), response_column);
}

}  // namespace gofscreen
