#include "syncap/dataplane/tcp_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "syncap/common/bytes.hpp"
#include "syncap/common/error.hpp"
#include "syncap/dataplane/stream_frame.hpp"

namespace syncap::dataplane {

namespace {

[[noreturn]] void io_fail(const std::string& what) { fail(ErrorCode::IoFailure, what + ": " + std::strerror(errno)); }

bool send_all(int fd, std::span<const std::uint8_t> bytes) {
  while (!bytes.empty()) {
    const auto n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) {
        pollfd p{fd, POLLOUT, 0};
        ::poll(&p, 1, 100);
        continue;
      }
      return false;
    }
    bytes = bytes.subspan(static_cast<std::size_t>(n));
  }
  return true;
}

std::vector<std::uint8_t> control(const std::array<std::uint8_t, 4>& magic, auto&& fill) {
  std::vector<std::uint8_t> out;
  ByteWriter w(out);
  w.bytes(magic);
  fill(w);
  return out;
}

}  // namespace

TcpStreamClient::TcpStreamClient(const std::string& host, std::uint16_t port, std::uint16_t device) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) io_fail("socket");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    fail(ErrorCode::InvalidArgument, "bad IPv4 address " + host);
  }
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const int err = errno;
    ::close(fd_);
    fd_ = -1;
    errno = err;
    io_fail("connect");
  }
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  if (!send_all(fd_, control(kHelloMagic, [&](ByteWriter& w) { w.u16(device); }))) io_fail("hello");
  std::array<std::uint8_t, 12> reply{};
  read_exact(reply.data(), reply.size());
  if (!std::equal(kResumeMagic.begin(), kResumeMagic.end(), reply.begin())) fail(ErrorCode::BadMagic, "expected RESUME");
  ByteReader r{std::span<const std::uint8_t>(reply).subspan(4)};
  const auto last = r.i64();
  if (last >= 0) resume_ = static_cast<std::uint32_t>(last);
}

TcpStreamClient::~TcpStreamClient() {
  if (fd_ >= 0) ::close(fd_);
}

void TcpStreamClient::read_exact(std::uint8_t* out, std::size_t n) {
  while (n > 0) {
    pollfd p{fd_, POLLIN, 0};
    if (::poll(&p, 1, 5000) <= 0) fail(ErrorCode::ConnectionLost, "manager did not answer");
    const auto got = ::recv(fd_, out, n, 0);
    if (got <= 0) fail(ErrorCode::ConnectionLost, "manager closed the connection");
    out += got;
    n -= static_cast<std::size_t>(got);
  }
}

std::size_t TcpStreamClient::try_write(std::span<const std::uint8_t> bytes) {
  if (fd_ < 0) fail(ErrorCode::ConnectionLost, "connection closed");
  if (bytes.empty()) return 0;
  const auto n = ::send(fd_, bytes.data(), bytes.size(), MSG_DONTWAIT | MSG_NOSIGNAL);
  if (n >= 0) return static_cast<std::size_t>(n);
  if (errno == EAGAIN || errno == EWOULDBLOCK || errno == EINTR) return 0;
  fail(ErrorCode::ConnectionLost, std::string("send: ") + std::strerror(errno));
}

std::vector<std::uint32_t> TcpStreamClient::poll_acks() {
  if (fd_ < 0) fail(ErrorCode::ConnectionLost, "connection closed");
  std::uint8_t buf[4096];
  while (true) {
    const auto n = ::recv(fd_, buf, sizeof buf, MSG_DONTWAIT);
    if (n > 0) {
      inbox_.insert(inbox_.end(), buf, buf + n);
      continue;
    }
    if (n == 0) fail(ErrorCode::ConnectionLost, "manager closed the connection");
    if (errno == EAGAIN || errno == EWOULDBLOCK) break;
    if (errno == EINTR) continue;
    fail(ErrorCode::ConnectionLost, std::string("recv: ") + std::strerror(errno));
  }
  std::vector<std::uint32_t> acks;
  std::size_t at = 0;
  while (inbox_.size() - at >= 8) {
    if (!std::equal(kAckMagic.begin(), kAckMagic.end(), inbox_.begin() + static_cast<std::ptrdiff_t>(at)))
      fail(ErrorCode::BadMagic, "unexpected control message");
    ByteReader r{std::span<const std::uint8_t>(inbox_).subspan(at + 4, 4)};
    acks.push_back(r.u32());
    at += 8;
  }
  inbox_.erase(inbox_.begin(), inbox_.begin() + static_cast<std::ptrdiff_t>(at));
  return acks;
}

void TcpStreamClient::reset() {
  if (fd_ < 0) return;
  linger l{1, 0};
  ::setsockopt(fd_, SOL_SOCKET, SO_LINGER, &l, sizeof l);
  ::close(fd_);
  fd_ = -1;
}

ManagerService::ManagerService(std::uint16_t port, std::set<std::uint16_t> devices, Sink sink, std::size_t joint_count,
                               MergePolicy policy)
    : joint_count_(joint_count), sink_(std::move(sink)), merger_(std::move(devices), policy) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) io_fail("socket");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 16) != 0) {
    const int err = errno;
    ::close(listen_fd_);
    errno = err;
    io_fail("bind/listen");
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  merge_thread_ = std::jthread([this](std::stop_token st) { merge_loop(st); });
  accept_thread_ = std::jthread([this](std::stop_token st) { accept_loop(st); });
}

ManagerService::~ManagerService() { stop(); }

std::int64_t ManagerService::now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void ManagerService::accept_loop(std::stop_token stop) {
  while (!stop.stop_requested()) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 50) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    {
      std::lock_guard lock(mutex_);
      ++stats_.connections;
    }
    std::lock_guard lock(threads_mutex_);
    readers_.emplace_back([this, fd](std::stop_token st) { serve(fd, st); });
  }
}

void ManagerService::serve(int fd, std::stop_token stop) {
  std::vector<std::uint8_t> hello;
  auto read_some = [&](std::vector<std::uint8_t>& into) -> bool {
    pollfd p{fd, POLLIN, 0};
    if (::poll(&p, 1, 50) <= 0) return true;
    std::uint8_t buf[65536];
    const auto n = ::recv(fd, buf, sizeof buf, 0);
    if (n <= 0) return false;
    into.insert(into.end(), buf, buf + n);
    return true;
  };

  while (hello.size() < 6) {
    if (stop.stop_requested() || !read_some(hello)) {
      ::close(fd);
      return;
    }
  }
  if (!std::equal(kHelloMagic.begin(), kHelloMagic.end(), hello.begin())) {
    ::close(fd);
    return;
  }
  const std::uint16_t device = static_cast<std::uint16_t>(hello[4] | (hello[5] << 8));
  std::int64_t last = -1;
  {
    std::lock_guard lock(mutex_);
    if (auto it = acked_.find(device); it != acked_.end()) last = it->second;
  }
  if (!send_all(fd, control(kResumeMagic, [&](ByteWriter& w) { w.i64(last); }))) {
    ::close(fd);
    return;
  }

  FrameDecoder decoder(is_valid_record_body);
  decoder.feed(std::span(hello).subspan(6));
  Verifier verifier(joint_count_);
  std::vector<std::uint8_t> chunk;
  bool open = true;
  while (open && !stop.stop_requested()) {
    while (auto body = decoder.next()) {
      auto record = deserialize_record(*body);
      const auto verdict = verifier.verify(record);
      const auto trigger = record.trigger_id;
      {
        std::lock_guard lock(mutex_);
        ++stats_.frames;
        if (verdict.verified) {
          ++stats_.verified;
          auto& a = acked_[device];
          a = std::max(a, trigger);
          inbox_.push_back(std::move(record));
        } else {
          ++stats_.rejected;
        }
      }
      if (verdict.verified) {
        wake_.notify_one();
        send_all(fd, control(kAckMagic, [&](ByteWriter& w) { w.u32(trigger); }));
      }
    }
    chunk.clear();
    open = read_some(chunk);
    decoder.feed(chunk);
  }
  decoder.finish();
  while (auto body = decoder.next()) {
    auto record = deserialize_record(*body);
    if (verifier.verify(record).verified) {
      std::lock_guard lock(mutex_);
      ++stats_.verified;
      inbox_.push_back(std::move(record));
    }
  }
  {
    std::lock_guard lock(mutex_);
    stats_.skipped_bytes += decoder.skipped_bytes();
  }
  ::close(fd);
}

void ManagerService::merge_loop(std::stop_token stop) {
  auto drain = [&](bool final) {
    std::vector<MergedCapture> out;
    {
      std::unique_lock lock(mutex_);
      while (!inbox_.empty()) {
        merger_.push(std::move(inbox_.front()), now_ns());
        inbox_.pop_front();
      }
      merger_.advance(now_ns());
      if (final) merger_.flush();
      out = merger_.take();
      stats_.merge = merger_.stats();
    }
    for (auto& m : out) sink_(std::move(m));
  };
  while (!stop.stop_requested()) {
    {
      std::unique_lock lock(mutex_);
      wake_.wait_for(lock, stop, std::chrono::milliseconds(50), [&] { return !inbox_.empty(); });
    }
    drain(false);
  }
  drain(true);
}

void ManagerService::stop() {
  if (stopped_.exchange(true)) return;
  accept_thread_.request_stop();
  if (accept_thread_.joinable()) accept_thread_.join();
  {
    std::lock_guard lock(threads_mutex_);
    for (auto& t : readers_) t.request_stop();
    for (auto& t : readers_)
      if (t.joinable()) t.join();
  }
  merge_thread_.request_stop();
  if (merge_thread_.joinable()) merge_thread_.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
  listen_fd_ = -1;
}

ManagerStats ManagerService::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

}  // namespace syncap::dataplane
