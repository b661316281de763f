#include "syncap/sync/clock.hpp"

#include <cmath>

namespace syncap::sync {

Nanos DeviceClock::local(Nanos global) const {
  return global + static_cast<Nanos>(std::llround(static_cast<double>(global) * drift_ppm * 1e-6 + offset_ns));
}

Nanos DeviceClock::global(Nanos local) const {
  return static_cast<Nanos>(std::llround((static_cast<double>(local) - offset_ns) / (1.0 + drift_ppm * 1e-6)));
}

}  // namespace syncap::sync
