#ifndef ONTOSEARCH_IO_HPP
#define ONTOSEARCH_IO_HPP

#include <string>
#include <vector>

namespace ontosearch {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Splits a line on a delimiter; empty fields preserved.
std::vector<std::string> split(const std::string& line, char delim);

/// Reads a delimited text file into rows of fields. Skips a trailing
/// empty line; does not interpret quoting.
std::vector<std::vector<std::string>> read_delimited(const std::string& path, char delim);

/// Formats a double so that parsing it back recovers the exact bits.
std::string format_double(double v);

} // namespace ontosearch

#endif
