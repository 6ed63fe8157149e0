#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nrt/error.hpp"

namespace nrt::csv {

class CsvError : public Error {
 public:
  using Error::Error;
};

struct Row {
  std::vector<std::string> cells;
  std::size_t line = 0;  // 1-based line on which the record starts
};

/// RFC-4180 reader. Accepts LF or CRLF line endings and a leading UTF-8 BOM.
/// Blank lines are skipped.
std::vector<Row> parse(std::string_view text);

std::string escape_cell(std::string_view cell);

/// One record terminated by '\n'.
std::string format_row(std::span<const std::string> cells);

}  // namespace nrt::csv
