#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "lshed/link.hpp"

namespace lshed {

// Blocking IPv4 UDP socket bound to a local port. Errors throw std::system_error.
class UdpSocket {
 public:
  // Port 0 binds an ephemeral port; see port().
  explicit UdpSocket(std::uint16_t port, const std::string& host = "127.0.0.1");
  ~UdpSocket();
  UdpSocket(const UdpSocket&) = delete;
  UdpSocket& operator=(const UdpSocket&) = delete;
  UdpSocket(UdpSocket&& other) noexcept;
  UdpSocket& operator=(UdpSocket&& other) noexcept;

  std::uint16_t port() const { return port_; }
  void send_to(std::uint16_t port, std::span<const std::uint8_t> datagram, const std::string& host = "127.0.0.1");
  // Waits up to timeout_ms (negative: forever); nullopt on timeout.
  std::optional<Bytes> receive(int timeout_ms);

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace lshed
