#include "connor/service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <iostream>

namespace connor::service {

Bytes encode_frame(FrameType type, ByteView payload) {
  ByteWriter w;
  w.put_be(payload.size() + 1, 4);
  w.put_u8(static_cast<std::uint8_t>(type));
  w.put(payload);
  return w.take();
}

Bytes encode_error(ErrorCode code, std::string_view message) {
  ByteWriter w;
  w.put_u8(static_cast<std::uint8_t>(code));
  w.put(message);
  return w.take();
}

Bytes handle_query(const EncryptedIndex& enc, const crypto::SwheBackend& backend, ByteView token_bytes,
                   bool hide_y_size) {
  QueryToken tok;
  try {
    tok = deserialize_token(token_bytes);
  } catch (const Error& e) {
    throw ServiceError(ErrorCode::kBadToken, std::string("bad token: ") + e.what());
  }
  return serialize_result(server_query(enc, backend, tok), hide_y_size);
}

namespace {

bool send_all(int fd, ByteView data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

// Returns false on EOF before the first byte; throws on a short read.
bool recv_all(int fd, std::uint8_t* out, std::size_t len) {
  std::size_t off = 0;
  while (off < len) {
    const ssize_t n = ::recv(fd, out + off, len - off, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n == 0 && off == 0) return false;
    if (n <= 0) throw ServiceError(ErrorCode::kMalformed, "connection closed mid-frame");
    off += static_cast<std::size_t>(n);
  }
  return true;
}

struct Incoming {
  std::uint8_t type;
  Bytes payload;
};

// nullopt on clean EOF. Throws ServiceError for malformed or oversized frames.
std::optional<Incoming> read_frame(int fd) {
  std::array<std::uint8_t, 4> hdr;
  if (!recv_all(fd, hdr.data(), hdr.size())) return std::nullopt;
  const std::uint32_t len = (std::uint32_t{hdr[0]} << 24) | (std::uint32_t{hdr[1]} << 16) |
                            (std::uint32_t{hdr[2]} << 8) | hdr[3];
  if (len == 0) throw ServiceError(ErrorCode::kMalformed, "empty frame");
  if (len > kMaxFrameBytes)
    throw ServiceError(ErrorCode::kOversized, "frame of " + std::to_string(len) + " bytes exceeds the 16 MiB limit");
  Bytes body(len);
  if (!recv_all(fd, body.data(), body.size())) throw ServiceError(ErrorCode::kMalformed, "connection closed mid-frame");
  return Incoming{body[0], Bytes(body.begin() + 1, body.end())};
}

int connect_to(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
    throw Error("cannot resolve " + host + ": " + gai_strerror(rc));
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error("cannot connect to " + host + ":" + service);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return fd;
}

struct FdGuard {
  int fd;
  ~FdGuard() {
    if (fd >= 0) ::close(fd);
  }
};

}  // namespace

Server::Server(const EncryptedIndex& enc, const crypto::SwheBackend& backend, const ServerOptions& opts)
    : enc_(enc), backend_(backend), opts_(opts) {
  if (backend.ciphertext_bits() != enc.z_bits) throw Error("SWHE backend width differs from the index");
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(opts.port);
  if (int rc = ::getaddrinfo(opts.host.c_str(), service.c_str(), &hints, &res); rc != 0)
    throw Error("cannot resolve " + opts.host + ": " + gai_strerror(rc));
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    listen_fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (listen_fd_ < 0) continue;
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(listen_fd_, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(listen_fd_, 64) == 0) break;
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  ::freeaddrinfo(res);
  if (listen_fd_ < 0) throw Error("cannot listen on " + opts.host + ":" + service + ": " + std::strerror(errno));
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port
                                           : reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
}

Server::~Server() {
  stop();
  {
    std::lock_guard lock(mu_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : workers_) t.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void Server::run() {
  while (!stopping_.load()) {
    pollfd p{listen_fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, 100);
    if (rc < 0 && errno != EINTR) throw Error(std::string("poll failed: ") + std::strerror(errno));
    if (rc <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(mu_);
    open_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
  std::lock_guard lock(mu_);
  for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
}

void Server::serve_connection(int fd) {
  try {
    while (auto frame = read_frame(fd)) {
      if (frame->type != static_cast<std::uint8_t>(FrameType::kQuery))
        throw ServiceError(ErrorCode::kUnknownType, "unexpected frame type");
      const Bytes result = handle_query(enc_, backend_, frame->payload, opts_.hide_y_size);
      if (!send_all(fd, encode_frame(FrameType::kResult, result))) break;
    }
  } catch (const ServiceError& e) {
    send_all(fd, encode_frame(FrameType::kError, encode_error(e.code(), e.what())));
  } catch (const std::exception& e) {
    send_all(fd, encode_frame(FrameType::kError, encode_error(ErrorCode::kInternal, e.what())));
  }
  std::lock_guard lock(mu_);
  open_fds_.erase(std::remove(open_fds_.begin(), open_fds_.end(), fd), open_fds_.end());
  ::close(fd);
}

std::pair<FrameType, Bytes> exchange_raw(const std::string& host, std::uint16_t port, ByteView raw) {
  FdGuard guard{connect_to(host, port)};
  if (!send_all(guard.fd, raw)) throw Error("send failed");
  auto frame = read_frame(guard.fd);
  if (!frame) throw Error("server closed the connection without answering");
  const auto type = static_cast<FrameType>(frame->type);
  if (type != FrameType::kResult && type != FrameType::kError) throw FormatError("unexpected response frame type");
  return {type, std::move(frame->payload)};
}

Bytes query_remote(const std::string& host, std::uint16_t port, ByteView token_bytes) {
  auto [type, payload] = exchange_raw(host, port, encode_frame(FrameType::kQuery, token_bytes));
  if (type == FrameType::kError) {
    if (payload.empty()) throw ServiceError(ErrorCode::kInternal, "empty error frame");
    throw ServiceError(static_cast<ErrorCode>(payload[0]),
                       "server error: " + std::string(payload.begin() + 1, payload.end()));
  }
  return payload;
}

}  // namespace connor::service
