#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "syncap/dataplane/record.hpp"

namespace syncap::dataplane {

/// Writable half of a reliable byte stream. try_write accepts as many bytes
/// as fit without blocking (possibly 0) and throws ConnectionLost when the
/// connection is gone.
class ByteStream {
 public:
  virtual ~ByteStream() = default;
  virtual std::size_t try_write(std::span<const std::uint8_t> bytes) = 0;
};

struct SenderStats {
  std::uint64_t enqueued = 0;
  std::uint64_t dropped_oldest = 0;
  std::uint64_t frames_sent = 0;  // fully written, counting resends
  std::uint64_t resent = 0;
  std::uint64_t acked = 0;
  std::uint64_t bytes_sent = 0;
  std::size_t peak_queue = 0;
};

/// Client-side transmission loop state. enqueue() never blocks: when the
/// backlog reaches `depth` frames the oldest queued frame is dropped. Sent
/// frames stay in flight until acknowledged so a reconnect can resume after
/// the last acknowledged trigger without duplicating acknowledged frames.
class StreamSender {
 public:
  explicit StreamSender(std::size_t depth = 64) : depth_(depth) {}

  void enqueue(const CaptureRecord& record);
  /// Writes until the stream would block or nothing is left. Returns bytes
  /// written. Propagates ConnectionLost, after which attach() is required.
  std::size_t pump(ByteStream& stream);
  void on_ack(std::uint32_t trigger_id);
  /// After a reconnect: drops in-flight frames the manager already has
  /// (trigger <= last_acked) and queues the rest for resend ahead of the backlog.
  void resume(std::optional<std::uint32_t> last_acked);

  std::size_t queued() const { return queue_.size(); }
  std::size_t in_flight() const { return in_flight_.size(); }
  bool idle() const { return queue_.empty() && !current_; }
  const SenderStats& stats() const { return stats_; }

 private:
  struct Frame {
    std::uint32_t trigger_id = 0;
    std::vector<std::uint8_t> bytes;
    bool resend = false;
  };

  std::size_t depth_;
  std::deque<Frame> queue_;
  std::optional<Frame> current_;
  std::size_t offset_ = 0;
  std::deque<Frame> in_flight_;
  SenderStats stats_;
};

}  // namespace syncap::dataplane
