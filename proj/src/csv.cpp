#include "pacc/csv.hpp"

#include <fstream>
#include <sstream>

#include "pacc/errors.hpp"

namespace pacc {

std::vector<std::vector<std::string>> read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool at_field_start = true;
  std::size_t line = 1;

  const auto end_field = [&]() {
    row.push_back(field);
    field.clear();
    field_was_quoted = false;
    at_field_start = true;
  };
  const auto end_row = [&]() {
    end_field();
    rows.push_back(row);
    row.clear();
  };

  char c;
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
        if (c == '\n') ++line;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!at_field_start) {
          throw DataError("csv: stray quote in unquoted field at line " +
                          std::to_string(line));
        }
        in_quotes = true;
        field_was_quoted = true;
        at_field_start = false;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;  // tolerated before LF
      case '\n':
        end_row();
        ++line;
        break;
      default:
        if (field_was_quoted) {
          throw DataError("csv: content after closing quote at line " +
                          std::to_string(line));
        }
        field.push_back(c);
        at_field_start = false;
        break;
    }
  }
  if (in_quotes) {
    throw DataError("csv: unterminated quoted field at line " +
                    std::to_string(line));
  }
  // Final row without trailing newline.
  if (!field.empty() || !row.empty() || field_was_quoted) end_row();
  return rows;
}

std::vector<std::vector<std::string>> read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("csv: cannot open '" + path + "'");
  return read_csv(in);
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    const std::string& f = fields[i];
    const bool needs_quotes = f.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

}  // namespace pacc
