#include "nrt/csv.hpp"

namespace nrt::csv {

std::vector<Row> parse(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<Row> rows;
  Row row;
  std::string cell;
  std::size_t line = 1;
  row.line = 1;
  bool in_quotes = false;
  bool cell_was_quoted = false;
  bool record_has_content = false;

  auto end_cell = [&] {
    row.cells.push_back(std::move(cell));
    cell.clear();
    cell_was_quoted = false;
  };
  auto end_record = [&] {
    if (record_has_content) {
      end_cell();
      rows.push_back(std::move(row));
    }
    row = Row{};
    cell.clear();
    cell_was_quoted = false;
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!cell.empty() || cell_was_quoted)
          throw CsvError("line " + std::to_string(line) + ": unexpected quote inside unquoted field");
        in_quotes = true;
        cell_was_quoted = true;
        record_has_content = true;
        break;
      case ',':
        record_has_content = true;
        end_cell();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        row.line = line;
        break;
      default:
        if (cell_was_quoted)
          throw CsvError("line " + std::to_string(line) + ": text after closing quote");
        cell.push_back(c);
        record_has_content = true;
    }
  }
  if (in_quotes) throw CsvError("line " + std::to_string(row.line) + ": unterminated quoted field");
  end_record();
  return rows;
}

std::string escape_cell(std::string_view cell) {
  if (cell.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(std::span<const std::string> cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out.push_back(',');
    out += escape_cell(cells[i]);
  }
  out.push_back('\n');
  return out;
}

}  // namespace nrt::csv
