#include "syncap/dataplane/stream_sender.hpp"

#include "syncap/dataplane/stream_frame.hpp"

namespace syncap::dataplane {

void StreamSender::enqueue(const CaptureRecord& record) {
  if (depth_ > 0 && queue_.size() >= depth_) {
    queue_.pop_front();
    ++stats_.dropped_oldest;
  }
  queue_.push_back({record.trigger_id, encode_frame(serialize_record(record)), false});
  ++stats_.enqueued;
  stats_.peak_queue = std::max(stats_.peak_queue, queue_.size());
}

std::size_t StreamSender::pump(ByteStream& stream) {
  std::size_t written = 0;
  while (true) {
    if (!current_) {
      if (queue_.empty()) break;
      current_ = std::move(queue_.front());
      queue_.pop_front();
      offset_ = 0;
    }
    const auto& bytes = current_->bytes;
    const std::size_t n = stream.try_write(std::span(bytes).subspan(offset_));
    offset_ += n;
    written += n;
    stats_.bytes_sent += n;
    if (offset_ < bytes.size()) break;
    ++stats_.frames_sent;
    if (current_->resend) ++stats_.resent;
    current_->resend = false;
    in_flight_.push_back(std::move(*current_));
    current_.reset();
  }
  return written;
}

void StreamSender::on_ack(std::uint32_t trigger_id) {
  while (!in_flight_.empty() && in_flight_.front().trigger_id <= trigger_id) {
    in_flight_.pop_front();
    ++stats_.acked;
  }
}

void StreamSender::resume(std::optional<std::uint32_t> last_acked) {
  std::deque<Frame> replay;
  for (auto& f : in_flight_) {
    if (last_acked && f.trigger_id <= *last_acked) {
      ++stats_.acked;
      continue;
    }
    f.resend = true;
    replay.push_back(std::move(f));
  }
  in_flight_.clear();
  if (current_) {
    replay.push_back(std::move(*current_));
    current_.reset();
    offset_ = 0;
  }
  for (auto it = replay.rbegin(); it != replay.rend(); ++it) queue_.push_front(std::move(*it));
}

}  // namespace syncap::dataplane
