#include "syncap/sim/spread.hpp"

#include <algorithm>
#include <cmath>

#include "syncap/common/error.hpp"

namespace syncap::sim {

SpreadSummary measure_capture_spread(const std::map<std::uint32_t, std::vector<DeviceCapture>>& captures,
                                     const std::vector<sync::DeviceClock>& clocks) {
  SpreadSummary out;
  for (const auto& [trigger, devices] : captures) {
    if (devices.size() < 2) continue;
    sync::Nanos lo = 0, hi = 0;
    bool first = true;
    for (const auto& d : devices) {
      if (d.device >= clocks.size()) fail(ErrorCode::InvalidArgument, "capture from a device without a clock");
      const sync::Nanos g = clocks[d.device].global(d.local_time);
      lo = first ? g : std::min(lo, g);
      hi = first ? g : std::max(hi, g);
      first = false;
    }
    out.per_trigger_ms.push_back(sync::ns_to_ms(hi - lo));
  }
  if (out.per_trigger_ms.empty()) return out;
  double sum = 0.0;
  for (double s : out.per_trigger_ms) sum += s;
  out.mean_ms = sum / static_cast<double>(out.per_trigger_ms.size());
  double var = 0.0;
  for (double s : out.per_trigger_ms) var += (s - out.mean_ms) * (s - out.mean_ms);
  out.std_ms = std::sqrt(var / static_cast<double>(out.per_trigger_ms.size()));
  out.max_ms = *std::max_element(out.per_trigger_ms.begin(), out.per_trigger_ms.end());
  return out;
}

}  // namespace syncap::sim
