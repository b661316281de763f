#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace syncap::harness {

using Cell = std::variant<std::string, double, std::int64_t>;

/// Metric table whose rows all lead with the seed and config hash that
/// produced them. Doubles print as %.9g, so equal inputs give equal bytes.
class CsvTable {
 public:
  CsvTable(std::vector<std::string> columns, std::uint64_t seed, std::string config_hash);

  /// Throws InvalidArgument when the cell count differs from the columns.
  void add(std::vector<Cell> cells);

  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  /// Throws IoFailure.
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::uint64_t seed_;
  std::string hash_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_cell(const Cell& cell);

}  // namespace syncap::harness
