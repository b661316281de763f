#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "syncap/dataplane/merge.hpp"
#include "syncap/dataplane/stream_sender.hpp"
#include "syncap/dataplane/verify.hpp"

namespace syncap::dataplane {

inline constexpr std::uint16_t kDefaultManagerPort = 40001;

// Control messages on the same connection: HELLO (client to manager),
// RESUME and ACK (manager to client).
inline constexpr std::array<std::uint8_t, 4> kHelloMagic{'S', 'C', 'H', 'L'};
inline constexpr std::array<std::uint8_t, 4> kResumeMagic{'S', 'C', 'R', 'S'};
inline constexpr std::array<std::uint8_t, 4> kAckMagic{'S', 'C', 'A', 'K'};

/// Client end of a device connection to the manager.
class TcpStreamClient final : public ByteStream {
 public:
  /// Connects and performs the HELLO/RESUME handshake. Throws IoFailure.
  TcpStreamClient(const std::string& host, std::uint16_t port, std::uint16_t device);
  ~TcpStreamClient() override;
  TcpStreamClient(const TcpStreamClient&) = delete;
  TcpStreamClient& operator=(const TcpStreamClient&) = delete;

  /// Last trigger the manager had acknowledged for this device when we connected.
  std::optional<std::uint32_t> resume_point() const { return resume_; }

  std::size_t try_write(std::span<const std::uint8_t> bytes) override;
  /// Acknowledged trigger ids received since the last call (non-blocking).
  std::vector<std::uint32_t> poll_acks();
  /// Abortive close, for tests of the resume path.
  void reset();

 private:
  void read_exact(std::uint8_t* out, std::size_t n);

  int fd_ = -1;
  std::optional<std::uint32_t> resume_;
  std::vector<std::uint8_t> inbox_;
};

struct ManagerStats {
  std::uint64_t connections = 0;
  std::uint64_t frames = 0;
  std::uint64_t verified = 0;
  std::uint64_t rejected = 0;
  std::uint64_t skipped_bytes = 0;
  MergeStats merge;
};

/// Manager side: one reader thread per connection (decode, verify, ack)
/// feeding a single merge stage whose output goes to `sink` on the merge thread.
class ManagerService {
 public:
  using Sink = std::function<void(MergedCapture)>;

  ManagerService(std::uint16_t port, std::set<std::uint16_t> devices, Sink sink, std::size_t joint_count = 25,
                 MergePolicy policy = {});
  ~ManagerService();

  std::uint16_t port() const { return port_; }
  /// Stops accepting, flushes the merger and joins all threads.
  void stop();
  ManagerStats stats() const;

 private:
  void accept_loop(std::stop_token stop);
  void serve(int fd, std::stop_token stop);
  void merge_loop(std::stop_token stop);
  static std::int64_t now_ns();

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::size_t joint_count_;
  Sink sink_;

  mutable std::mutex mutex_;
  std::condition_variable_any wake_;
  std::deque<CaptureRecord> inbox_;
  Merger merger_;
  std::map<std::uint16_t, std::uint32_t> acked_;
  ManagerStats stats_;
  std::atomic<bool> stopped_{false};

  std::mutex threads_mutex_;
  std::vector<std::jthread> readers_;
  std::jthread merge_thread_;
  std::jthread accept_thread_;
};

}  // namespace syncap::dataplane
