#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stokesim::csv {

/// One double rendered with 17 significant digits, enough for bit-exact
/// round-trips through text.
std::string format_value(double v);

struct Table {
  std::vector<std::string> metadata;      // emitted as "# ..." lines
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // each row.size() == columns.size()

  void add_meta(const std::string& line) { metadata.push_back(line); }
  void add_row(std::vector<double> row) { rows.push_back(std::move(row)); }
};

void write(std::ostream& os, const Table& table);

/// Writes to `path`, or to stdout when path is empty.
void write_to(const std::string& path, const Table& table);

}  // namespace stokesim::csv
