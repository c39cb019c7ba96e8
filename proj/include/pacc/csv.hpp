#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pacc {

// Strict RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line
// ends. Throws DataError on stray quotes or unterminated quoted fields,
// naming the row.
std::vector<std::vector<std::string>> read_csv(std::istream& in);
std::vector<std::vector<std::string>> read_csv_file(const std::string& path);

// Quotes a field only when it needs it.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace pacc
