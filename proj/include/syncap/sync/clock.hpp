#pragma once

#include "syncap/sync/time.hpp"

namespace syncap::sync {

/// A device clock against the simulated global clock:
/// local = global * (1 + drift_ppm * 1e-6) + offset.
struct DeviceClock {
  double offset_ns = 0.0;
  double drift_ppm = 0.0;

  Nanos local(Nanos global) const;
  Nanos global(Nanos local) const;
};

}  // namespace syncap::sync
