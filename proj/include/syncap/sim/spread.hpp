#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "syncap/sync/clock.hpp"

namespace syncap::sim {

struct DeviceCapture {
  std::size_t device = 0;
  sync::Nanos local_time = 0;  // device clock
};

struct SpreadSummary {
  std::vector<double> per_trigger_ms;  // in trigger order
  double mean_ms = 0.0;
  double std_ms = 0.0;  // population standard deviation
  double max_ms = 0.0;
};

/// Per trigger, max - min of the devices' true capture instants, mapping
/// each local time back through that device's clock. Triggers captured by
/// fewer than two devices are skipped.
SpreadSummary measure_capture_spread(const std::map<std::uint32_t, std::vector<DeviceCapture>>& captures,
                                     const std::vector<sync::DeviceClock>& clocks);

}  // namespace syncap::sim
