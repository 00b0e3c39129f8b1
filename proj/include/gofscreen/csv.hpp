#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

#include "gofscreen/dataset.hpp"

namespace gofscreen {

/// Raw CSV records with the 1-based source line of each row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;
};

/// RFC 4180 reader: comma separated, double-quoted fields may contain commas,
/// quotes ("") and line breaks.  Throws ParseError on ragged rows or
/// unterminated quotes.
CsvTable parse_csv(std::istream& in, bool has_header);

/// Loads a numeric table.  `response_column` is a header name, or a 1-based
/// column number when the file has no header (a numeric string is also
/// accepted with a header).  Every other column becomes a covariate.
Dataset load_csv(const std::string& path, const std::string& response_column,
                 bool has_header = true);

Dataset dataset_from_table(const CsvTable& table, const std::string& response_column);

}  // namespace gofscreen
