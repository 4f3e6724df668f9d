#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tcq/bitio.hpp"
#include "tcq/indexing.hpp"

namespace tcq {

// Channels x height x width of an index tensor.
struct TensorShape {
  std::uint32_t c = 0;
  std::uint32_t h = 0;
  std::uint32_t w = 0;

  std::size_t num_symbols() const {
    return static_cast<std::size_t>(c) * h * w;
  }
  bool operator==(const TensorShape&) const = default;
};

struct TensorPos {
  int c, i, j;  // 1-based channel, row, column
  bool operator==(const TensorPos&) const = default;
};

// Causal coding order: rows top to bottom, left to right within a row, and
// all channels at a position before moving on (i outer, j middle, c inner).
std::vector<TensorPos> traversal_order(const TensorShape& shape);

// Conditional probability model driven causally by the coder: counts() may
// depend only on symbols already passed to update(). Every symbol keeps a
// count >= 1 (nothing becomes undecodable) and the total stays <= 2^16 so
// the coder's interval arithmetic cannot overflow.
class ProbabilityModel {
 public:
  virtual ~ProbabilityModel() = default;
  virtual int alphabet_size() const = 0;
  // Fills out (size K) with the current per-symbol counts.
  virtual void counts(std::span<std::uint32_t> out) const = 0;
  virtual void update(int symbol) = 0;
};

enum class ModelKind : std::uint8_t {
  Static = 0,    // fixed counts, uniform unless constructed otherwise
  Order0 = 1,    // adaptive counts, +1 per symbol, rescale at total 2^15
  Neighbor = 2,  // adaptive counts conditioned on the previous symbol
};

std::unique_ptr<ProbabilityModel> make_model(ModelKind kind,
                                             int alphabet_size);
const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

class StaticModel : public ProbabilityModel {
 public:
  explicit StaticModel(int alphabet_size);  // uniform
  explicit StaticModel(std::vector<std::uint32_t> freqs);
  int alphabet_size() const override {
    return static_cast<int>(freqs_.size());
  }
  void counts(std::span<std::uint32_t> out) const override;
  void update(int symbol) override;

 private:
  std::vector<std::uint32_t> freqs_;
};

class AdaptiveOrder0Model : public ProbabilityModel {
 public:
  explicit AdaptiveOrder0Model(int alphabet_size);
  int alphabet_size() const override {
    return static_cast<int>(counts_.size());
  }
  void counts(std::span<std::uint32_t> out) const override;
  void update(int symbol) override;

 private:
  std::vector<std::uint32_t> counts_;
  std::uint32_t total_;
};

// One adaptive table per possible previous symbol; the first symbol of a
// stream uses context 0.
class NeighborContextModel : public ProbabilityModel {
 public:
  explicit NeighborContextModel(int alphabet_size);
  int alphabet_size() const override { return k_; }
  void counts(std::span<std::uint32_t> out) const override;
  void update(int symbol) override;

 private:
  int k_;
  int prev_ = 0;
  std::vector<std::uint32_t> counts_;  // k_ contexts * k_ symbols
  std::vector<std::uint32_t> totals_;
};

// Binary arithmetic coder, 32-bit integer state with underflow (E3) carry
// handling and bit-level renormalization. Frequencies are capped at 2^16 so
// range*cum fits 64 bits. The stream is self-delimiting only given the
// symbol count, which callers carry out of band; a desynchronized frequency
// table is undetectable by construction.
class ArithmeticEncoder {
 public:
  explicit ArithmeticEncoder(BitWriter& out) : out_(&out) {}
  // cum_lo/cum_hi are the symbol's cumulative bounds, total the table sum.
  void encode(std::uint32_t cum_lo, std::uint32_t cum_hi, std::uint32_t total);
  void finish();

 private:
  void emit(int bit);

  static constexpr std::uint64_t kHalf = 1ull << 31;
  static constexpr std::uint64_t kQuarter = 1ull << 30;
  static constexpr std::uint64_t kMask = (1ull << 32) - 1;

  std::uint64_t low_ = 0;
  std::uint64_t high_ = kMask;
  std::uint64_t pending_ = 0;
  BitWriter* out_;
};

class ArithmeticDecoder {
 public:
  // Primes the 32-bit code register; the reader must be in ZeroPad mode.
  explicit ArithmeticDecoder(BitReader& in);
  // Scaled target value in [0, total); look up the symbol whose cumulative
  // interval contains it, then call consume with that interval.
  std::uint32_t decode_target(std::uint32_t total) const;
  void consume(std::uint32_t cum_lo, std::uint32_t cum_hi,
               std::uint32_t total);

 private:
  int next_bit();

  static constexpr std::uint64_t kHalf = 1ull << 31;
  static constexpr std::uint64_t kQuarter = 1ull << 30;
  static constexpr std::uint64_t kMask = (1ull << 32) - 1;

  std::uint64_t low_ = 0;
  std::uint64_t high_ = kMask;
  std::uint64_t code_ = 0;
  BitReader* in_;
};

// Encodes symbols (each in [0, K)) against the model, querying then updating
// it per symbol. Throws std::invalid_argument on an out-of-alphabet symbol.
std::vector<std::uint8_t> ac_encode(std::span<const int> symbols,
                                    ProbabilityModel& model);

// Exact inverse given an identically initialized model. Throws FormatError
// when the stream runs out (more than the flush allowance of phantom bits is
// consumed past the end).
std::vector<int> ac_decode(std::span<const std::uint8_t> bytes,
                           std::size_t n_symbols, ProbabilityModel& model);

// Arithmetic-codes a C*H*W index plane (stored channel-major: channel, then
// row, then column) along traversal_order.
std::vector<std::uint8_t> encode_plane(std::span<const int> plane,
                                       const TensorShape& shape,
                                       ProbabilityModel& model);
std::vector<int> decode_plane(std::span<const std::uint8_t> bytes,
                              const TensorShape& shape,
                              ProbabilityModel& model);

// Entropy-coded container: the common 12-byte header with method = 3,
// then C, H, W as 4-byte unsigned big-endian each, a model id byte, and the
// arithmetic-coded payload.
struct EntropyContainer {
  BitstreamHeader header;  // num_symbols = C*H*W, method = 3
  TensorShape shape;
  ModelKind model = ModelKind::Order0;
  std::vector<std::uint8_t> payload;

  std::vector<std::uint8_t> to_bytes() const;
  static EntropyContainer parse(std::span<const std::uint8_t> bytes);
};

// Packages a method-II quantized sequence as an entropy-coded container and
// back. The shape must cover exactly the sequence length; round trips are
// bit-exact on the method-2 record.
EntropyContainer entropy_encode_seq(const QuantizedSeq& qs, const Codebook& cb,
                                    const TrellisSpec& t,
                                    const TensorShape& shape, ModelKind kind);
QuantizedSeq entropy_decode_seq(const EntropyContainer& ec, const Codebook& cb,
                                const TrellisSpec& t);

}  // namespace tcq
