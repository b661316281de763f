#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "syncap/dataplane/record.hpp"

namespace syncap::dataplane {

struct MergedCapture {
  std::uint32_t trigger_id = 0;
  std::map<std::uint16_t, CaptureRecord> records;
  std::size_t expected = 0;

  double completeness() const {
    return expected == 0 ? 0.0 : static_cast<double>(records.size()) / static_cast<double>(expected);
  }
};

struct MergePolicy {
  std::int64_t timeout_ns = 500'000'000;
};

struct MergeStats {
  std::uint64_t accepted = 0;
  std::uint64_t duplicates = 0;
  std::uint64_t late = 0;        // trigger already emitted
  std::uint64_t unexpected = 0;  // device not in the expected set
  std::uint64_t emitted = 0;
  std::uint64_t complete = 0;
};

/// Groups records by trigger id. A trigger is released when complete, when
/// every expected device has sent a higher id (watermark), or once it has
/// waited `timeout_ns` since its first record. Releases happen in increasing
/// trigger order: releasing T also releases every older pending trigger.
class Merger {
 public:
  Merger(std::set<std::uint16_t> devices, MergePolicy policy = {});

  void push(CaptureRecord record, std::int64_t now_ns);
  /// Applies the timeout rule at `now_ns`.
  void advance(std::int64_t now_ns);
  /// Releases everything still pending (end of session).
  void flush();

  /// Captures released so far and not yet taken.
  std::vector<MergedCapture> take();

  const MergeStats& stats() const { return stats_; }
  std::size_t pending() const { return pending_.size(); }

 private:
  struct Pending {
    MergedCapture capture;
    std::int64_t first_seen = 0;
  };

  void release_through(std::uint32_t trigger_id);
  void release_ready();

  std::set<std::uint16_t> devices_;
  MergePolicy policy_;
  std::map<std::uint32_t, Pending> pending_;
  std::map<std::uint16_t, std::uint32_t> high_water_;
  std::optional<std::uint32_t> last_emitted_;
  std::vector<MergedCapture> ready_;
  MergeStats stats_;
};

}  // namespace syncap::dataplane
