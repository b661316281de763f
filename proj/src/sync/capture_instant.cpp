#include "syncap/sync/capture_instant.hpp"

#include <cmath>

#include "syncap/common/error.hpp"

namespace syncap::sync {

void SyncScheme::validate() const {
  if (ntp_request_count < 1) fail(ErrorCode::InvalidArgument, "NTP request count must be >= 1");
  if (variant == SyncVariant::NtpBaseline && ntp_request_count != 1)
    fail(ErrorCode::InvalidArgument, "the NTP baseline issues exactly one request");
}

const char* to_string(SyncVariant variant) {
  switch (variant) {
    case SyncVariant::TriggerRelay: return "TRIGGER_RELAY";
    case SyncVariant::NtpBaseline: return "NTP_BASELINE";
    case SyncVariant::NtpAveraged: return "NTP_AVERAGED";
    case SyncVariant::NoCompensation: return "NO_COMPENSATION";
  }
  return "?";
}

Nanos capture_instant(const SyncScheme& scheme, const CaptureContext& context) {
  scheme.validate();
  switch (scheme.variant) {
    case SyncVariant::NoCompensation:
      return context.arrival;
    case SyncVariant::TriggerRelay: {
      const auto* plan = context.plan;
      if (!plan) fail(ErrorCode::MissingPlan, "trigger relay needs a compensation plan");
      if (context.role.host) return context.arrival + ms_to_ns(plan->host_delay_ms);
      if (context.role.client >= plan->clients()) fail(ErrorCode::MissingPlan, "client is not in the plan");
      return context.arrival + ms_to_ns(plan->client_delay_ms[context.role.client]);
    }
    case SyncVariant::NtpBaseline:
    case SyncVariant::NtpAveraged: {
      // the host keeps its own clock as the reference
      if (context.role.host) return context.agreed_global;
      if (!context.offset_estimate_ns) fail(ErrorCode::MissingOffset, "NTP scheme needs an offset estimate");
      return context.agreed_global - static_cast<Nanos>(std::llround(*context.offset_estimate_ns));
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown sync variant");
}

}  // namespace syncap::sync
