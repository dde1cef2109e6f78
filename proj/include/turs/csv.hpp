#pragma once

#include <string>
#include <vector>

namespace turs::csv {

/// RFC 4180 reader: quoted fields, doubled-quote escapes, CRLF or LF line
/// endings. Returns one vector of fields per record.
std::vector<std::vector<std::string>> read_file(const std::string& path);
std::vector<std::vector<std::string>> parse(const std::string& text);

std::string escape_field(const std::string& field);
void write_file(const std::string& path,
                const std::vector<std::vector<std::string>>& rows);

}  // namespace turs::csv
