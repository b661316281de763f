#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "syncap/harness/config.hpp"
#include "syncap/harness/csv.hpp"
#include "syncap/harness/report.hpp"

namespace syncap::harness {

/// Rank correlation with tied ranks averaged; 0 when either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct MissPoint {
  double pixel_sigma = 0.0;
  double rate = 0.0;
  int affected = 0;
  double mean_error_px = 0.0;  // seed average of per-seed mean re-projection error
  double std_error_px = 0.0;   // across seeds
  std::size_t frames = 0;
  std::size_t aborted = 0;     // threw, or came back unresolved while a valid pair saw the actor
  std::size_t unresolved = 0;  // flagged frames, including legitimate total misses
};

struct MissDetectionSweep {
  std::vector<MissPoint> points;
  CsvTable table;
  Report report;
};

/// Each seed draws one clean noisy observation set; every (rate, affected
/// count) cell then blanks whole detections on the first `affected`
/// cameras. The error of the reconstructed skeleton is measured against the
/// clean observations of all cameras, so blanked views still count.
MissDetectionSweep run_missdetection_sweep(const Config& config, std::uint64_t seed,
                                           const std::optional<std::filesystem::path>& out = std::nullopt);

}  // namespace syncap::harness
