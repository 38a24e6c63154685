#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "connor/query_engine.hpp"

namespace connor::service {

// Frame: u32 big-endian length of (type + payload), 1-byte type, payload.
enum class FrameType : std::uint8_t { kQuery = 0x01, kResult = 0x81, kError = 0x82 };

enum class ErrorCode : std::uint8_t {
  kMalformed = 1,
  kOversized = 2,
  kBadToken = 3,
  kUnknownType = 4,
  kInternal = 5,
};

inline constexpr std::size_t kMaxFrameBytes = std::size_t{16} << 20;

Bytes encode_frame(FrameType type, ByteView payload);
/// Error payload: reason code then a UTF-8 message.
Bytes encode_error(ErrorCode code, std::string_view message);

class ServiceError : public Error {
 public:
  ServiceError(ErrorCode code, const std::string& what) : Error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Answers one query payload the way the server does; throws ServiceError.
Bytes handle_query(const EncryptedIndex& enc, const crypto::SwheBackend& backend, ByteView token_bytes,
                   bool hide_y_size);

struct ServerOptions {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks a free port
  bool hide_y_size = false;
};

/// Thread-per-connection TCP server over a read-only index. A connection
/// may carry many requests; any protocol error is answered with an error
/// frame and the connection is closed.
class Server {
 public:
  Server(const EncryptedIndex& enc, const crypto::SwheBackend& backend, const ServerOptions& opts = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const { return port_; }
  /// Serves until stop(); safe to call stop() from a signal handler.
  void run();
  void stop() { stopping_.store(true); }

 private:
  void serve_connection(int fd);

  const EncryptedIndex& enc_;
  const crypto::SwheBackend& backend_;
  ServerOptions opts_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::mutex mu_;
  std::vector<std::thread> workers_;
  std::vector<int> open_fds_;
};

/// One request/response round trip; throws ServiceError on an error frame.
Bytes query_remote(const std::string& host, std::uint16_t port, ByteView token_bytes);

/// Sends raw bytes and returns the first frame the server answers with.
std::pair<FrameType, Bytes> exchange_raw(const std::string& host, std::uint16_t port, ByteView raw);

}  // namespace connor::service
