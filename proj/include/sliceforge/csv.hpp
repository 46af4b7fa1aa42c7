#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sliceforge::csv {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

// Splits one CSV line on commas. Fields in this project never contain commas
// or quotes, so no quoting rules are implemented.
std::vector<std::string> split_line(const std::string& line);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a column, or -1.
  int column(const std::string& name) const;
};

// Reads a whole CSV file with a header line. Throws ConfigError if the file
// cannot be opened. Blank trailing lines are ignored.
Table read_file(const std::string& path);

std::int64_t parse_i64(const std::string& s);  // throws ConfigError on junk
double parse_f64(const std::string& s);

}  // namespace sliceforge::csv
