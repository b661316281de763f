#include "syncap/harness/csv.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "syncap/common/error.hpp"

namespace syncap::harness {

std::string format_cell(const Cell& cell) {
  char buf[64];
  if (const auto* d = std::get_if<double>(&cell)) {
    if (std::isnan(*d)) return "nan";
    std::snprintf(buf, sizeof buf, "%.9g", *d);
    return buf;
  }
  if (const auto* i = std::get_if<std::int64_t>(&cell)) {
    std::snprintf(buf, sizeof buf, "%" PRId64, *i);
    return buf;
  }
  const auto& s = std::get<std::string>(cell);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

CsvTable::CsvTable(std::vector<std::string> columns, std::uint64_t seed, std::string config_hash)
    : columns_(std::move(columns)), seed_(seed), hash_(std::move(config_hash)) {}

void CsvTable::add(std::vector<Cell> cells) {
  if (cells.size() != columns_.size())
    fail(ErrorCode::InvalidArgument, "row has " + std::to_string(cells.size()) + " cells, table has " +
                                         std::to_string(columns_.size()) + " columns");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out = "seed,config_hash";
  for (const auto& c : columns_) out += "," + c;
  out += "\n";
  const std::string lead = std::to_string(seed_) + "," + hash_;
  for (const auto& row : rows_) {
    out += lead;
    for (const auto& cell : row) out += "," + format_cell(cell);
    out += "\n";
  }
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << str();
  if (!out) fail(ErrorCode::IoFailure, "cannot write " + path.string());
}

}  // namespace syncap::harness
