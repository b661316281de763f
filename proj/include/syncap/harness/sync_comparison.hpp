#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "syncap/harness/config.hpp"
#include "syncap/harness/csv.hpp"
#include "syncap/harness/report.hpp"

namespace syncap::harness {

struct SchemeSpread {
  std::string scheme;
  double jitter_ms = 0.0;
  int devices = 0;
  double mean_ms = 0.0;      // mean over seeds of the per-seed mean spread
  double std_ms = 0.0;       // population std of every per-trigger spread, pooled
  double seed_std_ms = 0.0;  // std of the per-seed means
  double max_ms = 0.0;
};

struct SyncComparison {
  std::vector<SchemeSpread> rows;
  CsvTable table;
  Report report;

  const SchemeSpread* find(const std::string& scheme, double jitter_ms, int devices) const;
};

/// Schemes x jitter levels x device counts, each averaged over a seed grid.
/// Every cell of one seed shares the same clocks and link latencies, so
/// schemes are compared on identical networks.
SyncComparison run_sync_comparison(const Config& config, std::uint64_t seed,
                                   const std::optional<std::filesystem::path>& out = std::nullopt);

}  // namespace syncap::harness
