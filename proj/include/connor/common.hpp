#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace connor {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// 128-bit PRF output; also used as dictionary key in the encrypted index.
using Label16 = std::array<std::uint8_t, 16>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual input. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Binary file or wire format violation (bad magic, truncation, width mismatch).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Integer accumulation left the representable range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

class CryptoError : public Error {
 public:
  using Error::Error;
};

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Append-only serializer. Endianness is chosen per call because the file
/// formats are little-endian and the wire protocol is big-endian.
class ByteWriter {
 public:
  void put_u8(std::uint8_t v) { out_.push_back(v); }
  void put_le(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_be(std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put(ByteView b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void put(std::string_view s) { put(as_bytes(s)); }

  Bytes& bytes() { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class ByteReader {
 public:
  explicit ByteReader(ByteView in) : in_(in) {}

  std::uint8_t u8() { return need(1)[0]; }
  std::uint64_t le(int width) {
    auto b = need(width);
    std::uint64_t v = 0;
    for (int i = width - 1; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  std::uint64_t be(int width) {
    auto b = need(width);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 8) | b[i];
    return v;
  }
  ByteView take(std::size_t n) { return need(n); }
  template <std::size_t N>
  std::array<std::uint8_t, N> array() {
    auto b = need(N);
    std::array<std::uint8_t, N> a{};
    std::copy(b.begin(), b.end(), a.begin());
    return a;
  }
  void expect_magic(std::string_view magic) {
    auto b = need(magic.size());
    if (!std::equal(b.begin(), b.end(), magic.begin()))
      throw FormatError("bad magic, expected " + std::string(magic));
  }

  std::size_t remaining() const { return in_.size() - pos_; }
  bool done() const { return pos_ == in_.size(); }

 private:
  ByteView need(std::size_t n) {
    if (in_.size() - pos_ < n) throw FormatError("truncated input");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  ByteView in_;
  std::size_t pos_ = 0;
};

Bytes read_file(const std::string& path);
void write_file(const std::string& path, ByteView data);

std::string to_hex(ByteView b);

}  // namespace connor
