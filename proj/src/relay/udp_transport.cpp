#include "syncap/relay/udp_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "syncap/common/error.hpp"

namespace syncap::relay {

namespace {

sockaddr_in to_sockaddr(Endpoint e) {
  sockaddr_in a{};
  a.sin_family = AF_INET;
  a.sin_addr.s_addr = htonl(static_cast<std::uint32_t>(e.id >> 16));
  a.sin_port = htons(static_cast<std::uint16_t>(e.id & 0xFFFF));
  return a;
}

Endpoint from_sockaddr(const sockaddr_in& a) {
  return {(static_cast<std::uint64_t>(ntohl(a.sin_addr.s_addr)) << 16) | ntohs(a.sin_port)};
}

}  // namespace

Endpoint make_endpoint(const std::string& ipv4, std::uint16_t port) {
  in_addr addr{};
  if (inet_pton(AF_INET, ipv4.c_str(), &addr) != 1) fail(ErrorCode::InvalidArgument, "bad IPv4 address " + ipv4);
  return {(static_cast<std::uint64_t>(ntohl(addr.s_addr)) << 16) | port};
}

std::string to_string(Endpoint e) {
  const auto a = to_sockaddr(e);
  char buf[INET_ADDRSTRLEN] = {};
  inet_ntop(AF_INET, &a.sin_addr, buf, sizeof buf);
  return std::string(buf) + ":" + std::to_string(ntohs(a.sin_port));
}

UdpSocket::UdpSocket(std::uint16_t port, const std::string& address) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) fail(ErrorCode::IoFailure, std::string("socket: ") + std::strerror(errno));
  auto addr = to_sockaddr(make_endpoint(address, port));
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string why = std::strerror(errno);
    ::close(fd_);
    fail(ErrorCode::IoFailure, "bind: " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  local_ = from_sockaddr(addr);
}

UdpSocket::~UdpSocket() {
  if (fd_ >= 0) ::close(fd_);
}

void UdpSocket::send(Endpoint to, std::span<const std::uint8_t> bytes) {
  const auto addr = to_sockaddr(to);
  ::sendto(fd_, bytes.data(), bytes.size(), MSG_DONTWAIT, reinterpret_cast<const sockaddr*>(&addr), sizeof addr);
}

std::optional<ReceivedDatagram> UdpSocket::receive(std::chrono::milliseconds timeout) {
  pollfd p{fd_, POLLIN, 0};
  if (::poll(&p, 1, static_cast<int>(timeout.count())) <= 0) return std::nullopt;
  std::vector<std::uint8_t> buf(2048);
  sockaddr_in from{};
  socklen_t len = sizeof from;
  const auto n =
      ::recvfrom(fd_, buf.data(), buf.size(), MSG_DONTWAIT, reinterpret_cast<sockaddr*>(&from), &len);
  if (n < 0) return std::nullopt;
  buf.resize(static_cast<std::size_t>(n));
  return ReceivedDatagram{from_sockaddr(from), std::move(buf)};
}

UdpRelayService::UdpRelayService(std::uint16_t port)
    : socket_(port), server_(socket_), worker_([this](std::stop_token stop) {
        while (!stop.stop_requested())
          if (auto d = socket_.receive(std::chrono::milliseconds(20))) server_.handle(d->from, d->bytes);
      }) {}

UdpRelayService::~UdpRelayService() {
  worker_.request_stop();
  if (worker_.joinable()) worker_.join();
}

}  // namespace syncap::relay
