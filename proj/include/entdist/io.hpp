#pragma once

#include <functional>
#include <string>
#include <vector>

namespace entdist {

// Writes via a temp file in the same directory plus rename, so readers never
// observe a partial file. Throws std::runtime_error with the path on failure.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

// Splits one CSV line on commas (no quoting; none of our formats need it).
std::vector<std::string> split_csv_line(const std::string& line);

// Strict numeric parses that reject trailing garbage; `context` names the
// file/row in the std::runtime_error message.
double parse_double(const std::string& token, const std::string& context);
long long parse_int(const std::string& token, const std::string& context);

void ensure_parent_dir(const std::string& path);

}  // namespace entdist
