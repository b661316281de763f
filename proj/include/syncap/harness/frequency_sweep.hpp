#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "syncap/harness/config.hpp"
#include "syncap/harness/csv.hpp"
#include "syncap/harness/report.hpp"

namespace syncap::harness {

struct SweepPoint {
  int devices = 0;
  double frequency_hz = 0.0;
  double offered_ratio = 0.0;  // offered bytes/s over the cap
  double mean_gap_s = 0.0;     // between consecutive merged captures
  double std_gap_s = 0.0;
  std::vector<double> backlog_bytes;  // sampled once per second of the window
};

struct FrequencySweep {
  std::vector<SweepPoint> points;
  CsvTable table;
  CsvTable transport;  // queueing-model comparison of per-request HTTP vs one stream
  Report report;
};

/// Every device sends a record of record_bytes per trigger over one shared
/// FIFO link capped at cap_bytes_per_s; a trigger is merged once its last
/// record arrives. Gaps are taken over triggers sent within window_s.
FrequencySweep run_frequency_sweep(const Config& config, std::uint64_t seed,
                                   const std::optional<std::filesystem::path>& out = std::nullopt);

/// Steady-state fraction of records delivered, for a persistent stream and
/// for one HTTP request per record (connection setup of three round trips
/// plus header bytes, one request in flight per device). A model only.
struct TransportModel {
  double stream_delivered = 0.0;
  double http_delivered = 0.0;
};
TransportModel transport_model(int devices, double frequency_hz, std::size_t record_bytes, double cap_bytes_per_s,
                               double one_way_latency_s);

}  // namespace syncap::harness
