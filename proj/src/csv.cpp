#include "stokesim/csv.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace stokesim::csv {

std::string format_value(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write(std::ostream& os, const Table& table) {
  for (const auto& line : table.metadata) os << "# " << line << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) os << ',';
    os << table.columns[i];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << format_value(row[i]);
    }
    os << '\n';
  }
}

void write_to(const std::string& path, const Table& table) {
  if (path.empty()) {
    write(std::cout, table);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  write(out, table);
}

}  // namespace stokesim::csv
