#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace tcq {

// Malformed bitstreams, containers, and tensor files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// MSB-first bit writer: the first bit written lands in bit 7 of byte 0.
// finish() zero-pads the trailing byte.
class BitWriter {
 public:
  void put_bit(int bit) {
    cur_ = static_cast<std::uint8_t>((cur_ << 1) | (bit & 1));
    if (++filled_ == 8) {
      bytes_.push_back(cur_);
      cur_ = 0;
      filled_ = 0;
    }
    ++bit_count_;
  }

  // Writes the low `width` bits of value, most significant first.
  void put_bits(std::uint32_t value, int width) {
    for (int i = width - 1; i >= 0; --i) {
      put_bit(static_cast<int>((value >> i) & 1u));
    }
  }

  std::size_t bit_count() const { return bit_count_; }

  std::vector<std::uint8_t> finish() {
    if (filled_ > 0) {
      bytes_.push_back(static_cast<std::uint8_t>(cur_ << (8 - filled_)));
      cur_ = 0;
      filled_ = 0;
    }
    return std::move(bytes_);
  }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint8_t cur_ = 0;
  int filled_ = 0;
  std::size_t bit_count_ = 0;
};

// MSB-first bit reader over a byte span. Reads past the end either throw
// (strict, the default) or return 0 while counting overrun bits; the
// arithmetic decoder legitimately looks a flushed-away tail ahead.
class BitReader {
 public:
  enum class Tail { Strict, ZeroPad };

  explicit BitReader(std::span<const std::uint8_t> bytes,
                     Tail tail = Tail::Strict)
      : bytes_(bytes), tail_(tail) {}

  int get_bit() {
    if (pos_ >= 8 * bytes_.size()) {
      if (tail_ == Tail::Strict) {
        throw FormatError("bitstream truncated: read past end of payload");
      }
      ++overrun_;
      return 0;
    }
    const std::size_t byte = pos_ / 8;
    const int shift = 7 - static_cast<int>(pos_ % 8);
    ++pos_;
    return (bytes_[byte] >> shift) & 1;
  }

  std::uint32_t get_bits(int width) {
    std::uint32_t v = 0;
    for (int i = 0; i < width; ++i) {
      v = (v << 1) | static_cast<std::uint32_t>(get_bit());
    }
    return v;
  }

  std::size_t bits_consumed() const { return pos_; }
  std::size_t overrun_bits() const { return overrun_; }

 private:
  std::span<const std::uint8_t> bytes_;
  Tail tail_;
  std::size_t pos_ = 0;
  std::size_t overrun_ = 0;
};

}  // namespace tcq
