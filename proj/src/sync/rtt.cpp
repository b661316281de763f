#include "syncap/sync/rtt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "syncap/common/error.hpp"

namespace syncap::sync {

std::vector<double> mean_rtt(const RttMatrix& samples) {
  std::vector<double> means;
  means.reserve(samples.rows.size());
  for (const auto& row : samples.rows) {
    if (row.empty()) fail(ErrorCode::EmptyMatrix, "client has no RTT sample");
    for (double v : row)
      if (!std::isfinite(v) || v < 0.0) fail(ErrorCode::InvalidArgument, "RTT samples must be finite and >= 0");
    means.push_back(std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(row.size()));
  }
  return means;
}

double max_rtt(const std::vector<double>& means) {
  if (means.empty()) fail(ErrorCode::NoClients, "no clients");
  return *std::max_element(means.begin(), means.end());
}

CompensationPlan compensation_plan(const std::vector<double>& means) {
  for (double v : means)
    if (!std::isfinite(v) || v < 0.0) fail(ErrorCode::InvalidArgument, "mean RTT must be finite and >= 0");
  CompensationPlan plan;
  plan.mean_rtt_ms = means;
  plan.max_rtt_ms = max_rtt(means);
  plan.client_delay_ms.reserve(means.size());
  for (double m : means) plan.client_delay_ms.push_back((plan.max_rtt_ms - m) / 2.0);
  plan.host_delay_ms = plan.max_rtt_ms / 2.0;
  return plan;
}

RttWindow::RttWindow(std::size_t clients, std::size_t window) : window_(window), samples_(clients) {
  if (window == 0) fail(ErrorCode::InvalidArgument, "window must hold at least one sample");
  if (clients == 0) fail(ErrorCode::NoClients, "no clients");
}

void RttWindow::add(std::size_t client, double rtt_ms) {
  if (client >= samples_.size()) fail(ErrorCode::UnknownClient, "client index out of range");
  auto& q = samples_[client];
  q.push_back(rtt_ms);
  if (q.size() > window_) q.pop_front();
}

bool RttWindow::ready() const {
  return std::all_of(samples_.begin(), samples_.end(), [](const auto& q) { return !q.empty(); });
}

CompensationPlan RttWindow::plan() const {
  RttMatrix m;
  for (const auto& q : samples_) m.rows.emplace_back(q.begin(), q.end());
  return compensation_plan(m);
}

}  // namespace syncap::sync
