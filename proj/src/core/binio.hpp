#pragma once

// Little-endian binary readers/writers with byte-offset tracking so format
// errors can name the offending position.

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace adast {

class BinWriter {
 public:
  explicit BinWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
    require(out_.good(), ErrorKind::Io, "cannot open ", path, " for writing");
  }

  void bytes(const void* p, size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    offset_ += n;
  }

  void u8(uint8_t v) { bytes(&v, 1); }

  void u32(uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                    static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
    bytes(b, 4);
  }

  void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }

  void f64(double v) {
    const uint64_t u = std::bit_cast<uint64_t>(v);
    u32(static_cast<uint32_t>(u));
    u32(static_cast<uint32_t>(u >> 32));
  }

  void str(const std::string& s) { bytes(s.data(), s.size()); }

  void close() {
    out_.close();
    require(out_.good(), ErrorKind::Io, "failed writing ", path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
  size_t offset_ = 0;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
    require(in_.good(), ErrorKind::Io, "cannot open ", path, " for reading");
  }

  size_t offset() const { return offset_; }

  bool at_eof() {
    in_.peek();
    return in_.eof();
  }

  void bytes(void* p, size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n) {
      raise(ErrorKind::Format, path_, ": truncated at byte offset ", offset_,
            " (wanted ", n, " bytes, got ", in_.gcount(), ")");
    }
    offset_ += n;
  }

  uint8_t u8() {
    uint8_t v = 0;
    bytes(&v, 1);
    return v;
  }

  uint32_t u32() {
    uint8_t b[4];
    bytes(b, 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  }

  float f32() { return std::bit_cast<float>(u32()); }

  double f64() {
    const uint64_t lo = u32();
    const uint64_t hi = u32();
    return std::bit_cast<double>(lo | (hi << 32));
  }

  std::string str(size_t n) {
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  size_t offset_ = 0;
};

}  // namespace adast
