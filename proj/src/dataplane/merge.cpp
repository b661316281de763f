#include "syncap/dataplane/merge.hpp"

namespace syncap::dataplane {

Merger::Merger(std::set<std::uint16_t> devices, MergePolicy policy) : devices_(std::move(devices)), policy_(policy) {}

void Merger::push(CaptureRecord record, std::int64_t now_ns) {
  if (!devices_.contains(record.device)) {
    ++stats_.unexpected;
    return;
  }
  const std::uint32_t id = record.trigger_id;
  const std::uint16_t device = record.device;
  if (last_emitted_ && id <= *last_emitted_) {
    ++stats_.late;
    return;
  }
  auto [it, fresh] = pending_.try_emplace(id);
  auto& p = it->second;
  if (fresh) {
    p.capture.trigger_id = id;
    p.capture.expected = devices_.size();
    p.first_seen = now_ns;
  }
  if (!p.capture.records.try_emplace(device, std::move(record)).second) {
    ++stats_.duplicates;
    return;
  }
  ++stats_.accepted;
  auto hw = high_water_.find(device);
  if (hw == high_water_.end() || id > hw->second) high_water_[device] = id;
  release_ready();
  advance(now_ns);
}

void Merger::release_through(std::uint32_t trigger_id) {
  while (!pending_.empty() && pending_.begin()->first <= trigger_id) {
    auto node = pending_.extract(pending_.begin());
    auto& capture = node.mapped().capture;
    ++stats_.emitted;
    if (capture.records.size() == capture.expected) ++stats_.complete;
    last_emitted_ = capture.trigger_id;
    ready_.push_back(std::move(capture));
  }
}

void Merger::release_ready() {
  // watermark: the lowest id any expected device has passed
  std::optional<std::uint32_t> floor;
  if (high_water_.size() == devices_.size())
    for (const auto& [d, id] : high_water_) floor = floor ? std::min(*floor, id) : id;

  std::optional<std::uint32_t> through;
  for (const auto& [id, p] : pending_) {
    if (p.capture.records.size() == p.capture.expected || (floor && id < *floor)) through = id;
  }
  if (through) release_through(*through);
}

void Merger::advance(std::int64_t now_ns) {
  std::optional<std::uint32_t> through;
  for (const auto& [id, p] : pending_)
    if (now_ns - p.first_seen >= policy_.timeout_ns) through = id;
  if (through) release_through(*through);
}

void Merger::flush() {
  if (!pending_.empty()) release_through(pending_.rbegin()->first);
}

std::vector<MergedCapture> Merger::take() {
  std::vector<MergedCapture> out;
  out.swap(ready_);
  return out;
}

}  // namespace syncap::dataplane
