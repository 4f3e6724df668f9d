#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tcq/bitio.hpp"
#include "tcq/codebook.hpp"
#include "tcq/trellis.hpp"

namespace tcq {

// Fixed 12-byte container header shared by all serialized streams:
//   magic "TCQ1" | version u8 | R u8 | method u8 | num_symbols u32 BE |
//   initial_state u8
// method 1/2 are the two index codings below; method 3 is the entropy-coded
// container (see entropy.hpp).
struct BitstreamHeader {
  static constexpr std::array<std::uint8_t, 4> kMagic = {'T', 'C', 'Q', '1'};
  static constexpr std::uint8_t kVersion = 1;
  static constexpr std::size_t kSize = 12;

  static constexpr std::uint8_t kMethod1 = 1;
  static constexpr std::uint8_t kMethod2 = 2;
  static constexpr std::uint8_t kMethodEntropy = 3;

  std::uint8_t version = kVersion;
  std::uint8_t rate_bits = 0;
  std::uint8_t method = 0;
  std::uint32_t num_symbols = 0;
  std::uint8_t initial_state = 0;

  void append_to(std::vector<std::uint8_t>& out) const;
  // Parses and validates magic/version; throws FormatError.
  static BitstreamHeader parse(std::span<const std::uint8_t> bytes);
};

// Serialized quantized sequence: header + MSB-first packed payload,
// zero-padded to a byte boundary. Payload carries num_symbols * R bits
// before padding for both methods.
struct Bitstream {
  BitstreamHeader header;
  std::vector<std::uint8_t> payload;

  std::size_t payload_bits() const {
    return static_cast<std::size_t>(header.num_symbols) * header.rate_bits;
  }
  std::vector<std::uint8_t> to_bytes() const;
};

// Total serialized size of the record a header announces.
std::size_t record_size(const BitstreamHeader& h);

// Splits off one record from the front of `bytes` (which may hold several
// concatenated records). Throws FormatError when truncated or malformed.
Bitstream parse_bitstream(std::span<const std::uint8_t> bytes);

// Method I: per symbol, 1 branch bit q followed by the (R-1)-bit rank of the
// codeword within the chosen subset (no rank bits when R = 1).
Bitstream encode_method1(const QuantizedSeq& qs, const Codebook& cb,
                         const TrellisSpec& t);
QuantizedSeq decode_method1(const Bitstream& bs, const Codebook& cb,
                            const TrellisSpec& t);

// Method II: per symbol, the R-bit rank of the codeword within the current
// state's union quantizer; the decoder infers the branch from the codeword's
// subset.
Bitstream encode_method2(const QuantizedSeq& qs, const Codebook& cb,
                         const TrellisSpec& t);
QuantizedSeq decode_method2(const Bitstream& bs, const Codebook& cb,
                            const TrellisSpec& t);

// Per-symbol method-II indices (rank within the state's union), each in
// [0, 2^R); the input alphabet for entropy coding.
std::vector<int> index_plane_method2(const QuantizedSeq& qs, const Codebook& cb,
                                     const TrellisSpec& t);

// Per-symbol method-I codes read as R-bit integers (branch bit high, subset
// rank low); the stream method I would feed an entropy coder.
std::vector<int> method1_codes(const QuantizedSeq& qs, const Codebook& cb,
                               const TrellisSpec& t);

}  // namespace tcq
