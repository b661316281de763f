#pragma once

#include <cstddef>
#include <deque>
#include <vector>

namespace syncap::sync {

/// RTT samples in milliseconds; rows are clients, columns are samples.
struct RttMatrix {
  std::vector<std::vector<double>> rows;

  std::size_t clients() const { return rows.size(); }
};

/// Per-client mean RTT. Throws EmptyMatrix when any client has no sample and
/// InvalidArgument for negative or non-finite samples.
std::vector<double> mean_rtt(const RttMatrix& samples);

/// Largest mean RTT; throws NoClients on an empty list.
double max_rtt(const std::vector<double>& means);

struct CompensationPlan {
  std::vector<double> mean_rtt_ms;
  double max_rtt_ms = 0.0;
  std::vector<double> client_delay_ms;  // (max - mean) / 2, so the slowest client waits 0
  double host_delay_ms = 0.0;           // max / 2 after the host's own send

  std::size_t clients() const { return mean_rtt_ms.size(); }
};

CompensationPlan compensation_plan(const std::vector<double>& means);

inline CompensationPlan compensation_plan(const RttMatrix& samples) { return compensation_plan(mean_rtt(samples)); }

// Sliding-window re-estimation of the plan. Off in the default session
// flow, which measures once when the session starts.
class RttWindow {
 public:
  RttWindow(std::size_t clients, std::size_t window);

  void add(std::size_t client, double rtt_ms);
  bool ready() const;
  CompensationPlan plan() const;

 private:
  std::size_t window_;
  std::vector<std::deque<double>> samples_;
};

}  // namespace syncap::sync
