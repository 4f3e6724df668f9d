#include "tcq/entropy.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tcq {

std::vector<TensorPos> traversal_order(const TensorShape& shape) {
  if (shape.c == 0 || shape.h == 0 || shape.w == 0) {
    throw std::invalid_argument("traversal_order: shape dimensions must be positive");
  }
  std::vector<TensorPos> order;
  order.reserve(shape.num_symbols());
  for (std::uint32_t i = 1; i <= shape.h; ++i) {
    for (std::uint32_t j = 1; j <= shape.w; ++j) {
      for (std::uint32_t c = 1; c <= shape.c; ++c) {
        order.push_back({static_cast<int>(c), static_cast<int>(i),
                         static_cast<int>(j)});
      }
    }
  }
  return order;
}

namespace {

// Channel-major storage offset of a 1-based position.
std::size_t linear_offset(const TensorShape& s, const TensorPos& p) {
  return (static_cast<std::size_t>(p.c) - 1) * s.h * s.w +
         (static_cast<std::size_t>(p.i) - 1) * s.w +
         (static_cast<std::size_t>(p.j) - 1);
}

constexpr std::uint32_t kMaxTotal = 1u << 16;
constexpr std::uint32_t kRescaleAt = 1u << 15;

void check_alphabet(int k) {
  if (k < 2 || static_cast<std::uint32_t>(k) > kMaxTotal) {
    throw std::invalid_argument("alphabet size must be in [2, 65536]");
  }
}

}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Static: return "static";
    case ModelKind::Order0: return "order0";
    case ModelKind::Neighbor: return "neighbor";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "static") return ModelKind::Static;
  if (name == "order0") return ModelKind::Order0;
  if (name == "neighbor") return ModelKind::Neighbor;
  throw std::invalid_argument("unknown model \"" + name +
                              "\" (expected static, order0 or neighbor)");
}

std::unique_ptr<ProbabilityModel> make_model(ModelKind kind,
                                             int alphabet_size) {
  switch (kind) {
    case ModelKind::Static:
      return std::make_unique<StaticModel>(alphabet_size);
    case ModelKind::Order0:
      return std::make_unique<AdaptiveOrder0Model>(alphabet_size);
    case ModelKind::Neighbor:
      return std::make_unique<NeighborContextModel>(alphabet_size);
  }
  throw std::invalid_argument("unknown model kind");
}

StaticModel::StaticModel(int alphabet_size) {
  check_alphabet(alphabet_size);
  freqs_.assign(static_cast<std::size_t>(alphabet_size), 1);
}

StaticModel::StaticModel(std::vector<std::uint32_t> freqs)
    : freqs_(std::move(freqs)) {
  check_alphabet(static_cast<int>(freqs_.size()));
  std::uint64_t total = 0;
  for (std::uint32_t f : freqs_) {
    if (f == 0) throw std::invalid_argument("static frequency must be >= 1");
    total += f;
  }
  if (total > kMaxTotal) {
    throw std::invalid_argument("static frequency total exceeds 2^16");
  }
}

void StaticModel::counts(std::span<std::uint32_t> out) const {
  std::copy(freqs_.begin(), freqs_.end(), out.begin());
}

void StaticModel::update(int) {}

AdaptiveOrder0Model::AdaptiveOrder0Model(int alphabet_size) {
  check_alphabet(alphabet_size);
  counts_.assign(static_cast<std::size_t>(alphabet_size), 1);
  total_ = static_cast<std::uint32_t>(alphabet_size);
}

void AdaptiveOrder0Model::counts(std::span<std::uint32_t> out) const {
  std::copy(counts_.begin(), counts_.end(), out.begin());
}

void AdaptiveOrder0Model::update(int symbol) {
  ++counts_[static_cast<std::size_t>(symbol)];
  if (++total_ >= kRescaleAt) {
    total_ = 0;
    for (auto& c : counts_) {
      c = (c + 1) / 2;  // halving keeps every count >= 1
      total_ += c;
    }
  }
}

NeighborContextModel::NeighborContextModel(int alphabet_size)
    : k_(alphabet_size) {
  check_alphabet(alphabet_size);
  counts_.assign(static_cast<std::size_t>(k_) * k_, 1);
  totals_.assign(static_cast<std::size_t>(k_), static_cast<std::uint32_t>(k_));
}

void NeighborContextModel::counts(std::span<std::uint32_t> out) const {
  const std::uint32_t* row = counts_.data() + static_cast<std::size_t>(prev_) * k_;
  std::copy(row, row + k_, out.begin());
}

void NeighborContextModel::update(int symbol) {
  const std::size_t base = static_cast<std::size_t>(prev_) * k_;
  ++counts_[base + static_cast<std::size_t>(symbol)];
  if (++totals_[static_cast<std::size_t>(prev_)] >= kRescaleAt) {
    std::uint32_t total = 0;
    for (int s = 0; s < k_; ++s) {
      counts_[base + static_cast<std::size_t>(s)] =
          (counts_[base + static_cast<std::size_t>(s)] + 1) / 2;
      total += counts_[base + static_cast<std::size_t>(s)];
    }
    totals_[static_cast<std::size_t>(prev_)] = total;
  }
  prev_ = symbol;
}

void ArithmeticEncoder::emit(int bit) {
  out_->put_bit(bit);
  for (; pending_ > 0; --pending_) out_->put_bit(!bit);
}

void ArithmeticEncoder::encode(std::uint32_t cum_lo, std::uint32_t cum_hi,
                               std::uint32_t total) {
  const std::uint64_t range = high_ - low_ + 1;
  high_ = low_ + range * cum_hi / total - 1;
  low_ = low_ + range * cum_lo / total;
  for (;;) {
    if (high_ < kHalf) {
      emit(0);
    } else if (low_ >= kHalf) {
      emit(1);
      low_ -= kHalf;
      high_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < 3 * kQuarter) {
      ++pending_;
      low_ -= kQuarter;
      high_ -= kQuarter;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1;
  }
}

void ArithmeticEncoder::finish() {
  ++pending_;
  emit(low_ >= kQuarter ? 1 : 0);
}

ArithmeticDecoder::ArithmeticDecoder(BitReader& in) : in_(&in) {
  for (int i = 0; i < 32; ++i) {
    code_ = (code_ << 1) | static_cast<std::uint64_t>(in_->get_bit());
  }
}

int ArithmeticDecoder::next_bit() { return in_->get_bit(); }

std::uint32_t ArithmeticDecoder::decode_target(std::uint32_t total) const {
  const std::uint64_t range = high_ - low_ + 1;
  return static_cast<std::uint32_t>(((code_ - low_ + 1) * total - 1) / range);
}

void ArithmeticDecoder::consume(std::uint32_t cum_lo, std::uint32_t cum_hi,
                                std::uint32_t total) {
  const std::uint64_t range = high_ - low_ + 1;
  high_ = low_ + range * cum_hi / total - 1;
  low_ = low_ + range * cum_lo / total;
  for (;;) {
    if (high_ < kHalf) {
      // nothing to drop
    } else if (low_ >= kHalf) {
      low_ -= kHalf;
      high_ -= kHalf;
      code_ -= kHalf;
    } else if (low_ >= kQuarter && high_ < 3 * kQuarter) {
      low_ -= kQuarter;
      high_ -= kQuarter;
      code_ -= kQuarter;
    } else {
      break;
    }
    low_ <<= 1;
    high_ = (high_ << 1) | 1;
    code_ = (code_ << 1) | static_cast<std::uint64_t>(next_bit());
  }
}

namespace {

struct CumTable {
  std::vector<std::uint32_t> cum;  // size K+1, cum[0] = 0

  void rebuild(const ProbabilityModel& model,
               std::vector<std::uint32_t>& scratch) {
    const int k = model.alphabet_size();
    scratch.resize(static_cast<std::size_t>(k));
    model.counts(scratch);
    cum.resize(static_cast<std::size_t>(k) + 1);
    cum[0] = 0;
    for (int s = 0; s < k; ++s) {
      const std::uint32_t f = scratch[static_cast<std::size_t>(s)];
      if (f == 0) throw std::logic_error("model produced a zero frequency");
      cum[static_cast<std::size_t>(s) + 1] = cum[static_cast<std::size_t>(s)] + f;
    }
    if (cum.back() > kMaxTotal) {
      throw std::logic_error("model frequency total exceeds 2^16");
    }
  }
};

}  // namespace

std::vector<std::uint8_t> ac_encode(std::span<const int> symbols,
                                    ProbabilityModel& model) {
  BitWriter writer;
  ArithmeticEncoder enc(writer);
  CumTable table;
  std::vector<std::uint32_t> scratch;
  const int k = model.alphabet_size();
  for (int x : symbols) {
    if (x < 0 || x >= k) {
      std::ostringstream os;
      os << "ac_encode: symbol " << x << " outside alphabet [0," << k << ")";
      throw std::invalid_argument(os.str());
    }
    table.rebuild(model, scratch);
    enc.encode(table.cum[static_cast<std::size_t>(x)],
               table.cum[static_cast<std::size_t>(x) + 1], table.cum.back());
    model.update(x);
  }
  enc.finish();
  return writer.finish();
}

std::vector<int> ac_decode(std::span<const std::uint8_t> bytes,
                           std::size_t n_symbols, ProbabilityModel& model) {
  BitReader reader(bytes, BitReader::Tail::ZeroPad);
  ArithmeticDecoder dec(reader);
  CumTable table;
  std::vector<std::uint32_t> scratch;
  std::vector<int> out;
  out.reserve(n_symbols);
  for (std::size_t i = 0; i < n_symbols; ++i) {
    table.rebuild(model, scratch);
    const std::uint32_t target = dec.decode_target(table.cum.back());
    // first symbol whose cumulative upper bound exceeds the target
    const auto it =
        std::upper_bound(table.cum.begin() + 1, table.cum.end(), target);
    const int sym = static_cast<int>(it - (table.cum.begin() + 1));
    dec.consume(table.cum[static_cast<std::size_t>(sym)],
                table.cum[static_cast<std::size_t>(sym) + 1],
                table.cum.back());
    model.update(sym);
    // The encoder's flush leaves at most a code register's worth of bits
    // unwritten; consuming more phantom tail than that means the stream is
    // genuinely short.
    if (reader.overrun_bits() > 32) {
      throw FormatError("arithmetic stream exhausted before all symbols");
    }
    out.push_back(sym);
  }
  return out;
}

std::vector<std::uint8_t> encode_plane(std::span<const int> plane,
                                       const TensorShape& shape,
                                       ProbabilityModel& model) {
  if (plane.size() != shape.num_symbols()) {
    throw std::invalid_argument("encode_plane: plane length != C*H*W");
  }
  std::vector<int> ordered;
  ordered.reserve(plane.size());
  for (const TensorPos& p : traversal_order(shape)) {
    ordered.push_back(plane[linear_offset(shape, p)]);
  }
  return ac_encode(ordered, model);
}

std::vector<int> decode_plane(std::span<const std::uint8_t> bytes,
                              const TensorShape& shape,
                              ProbabilityModel& model) {
  const std::vector<int> ordered = ac_decode(bytes, shape.num_symbols(), model);
  std::vector<int> plane(shape.num_symbols());
  std::size_t k = 0;
  for (const TensorPos& p : traversal_order(shape)) {
    plane[linear_offset(shape, p)] = ordered[k++];
  }
  return plane;
}

namespace {

void append_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint32_t read_u32_be(std::span<const std::uint8_t> b, std::size_t off) {
  return (static_cast<std::uint32_t>(b[off]) << 24) |
         (static_cast<std::uint32_t>(b[off + 1]) << 16) |
         (static_cast<std::uint32_t>(b[off + 2]) << 8) |
         static_cast<std::uint32_t>(b[off + 3]);
}

}  // namespace

std::vector<std::uint8_t> EntropyContainer::to_bytes() const {
  std::vector<std::uint8_t> out;
  out.reserve(BitstreamHeader::kSize + 13 + payload.size());
  header.append_to(out);
  append_u32_be(out, shape.c);
  append_u32_be(out, shape.h);
  append_u32_be(out, shape.w);
  out.push_back(static_cast<std::uint8_t>(model));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

EntropyContainer EntropyContainer::parse(std::span<const std::uint8_t> bytes) {
  EntropyContainer ec;
  ec.header = BitstreamHeader::parse(bytes);
  if (ec.header.method != BitstreamHeader::kMethodEntropy) {
    throw FormatError("not an entropy container (method != 3)");
  }
  constexpr std::size_t kShapeAndModel = 13;
  if (bytes.size() < BitstreamHeader::kSize + kShapeAndModel) {
    throw FormatError("entropy container truncated before shape");
  }
  ec.shape.c = read_u32_be(bytes, BitstreamHeader::kSize);
  ec.shape.h = read_u32_be(bytes, BitstreamHeader::kSize + 4);
  ec.shape.w = read_u32_be(bytes, BitstreamHeader::kSize + 8);
  const std::uint8_t model_id = bytes[BitstreamHeader::kSize + 12];
  if (model_id > 2) throw FormatError("unknown model id in entropy container");
  ec.model = static_cast<ModelKind>(model_id);
  if (ec.shape.num_symbols() != ec.header.num_symbols) {
    throw FormatError("entropy container shape does not match num_symbols");
  }
  ec.payload.assign(bytes.begin() + BitstreamHeader::kSize + kShapeAndModel,
                    bytes.end());
  return ec;
}

EntropyContainer entropy_encode_seq(const QuantizedSeq& qs, const Codebook& cb,
                                    const TrellisSpec& t,
                                    const TensorShape& shape, ModelKind kind) {
  if (shape.num_symbols() != qs.size()) {
    throw std::invalid_argument(
        "entropy_encode_seq: shape does not cover the sequence");
  }
  const std::vector<int> plane = index_plane_method2(qs, cb, t);
  auto model = make_model(kind, cb.union_size());
  EntropyContainer ec;
  ec.header.rate_bits = static_cast<std::uint8_t>(cb.rate_bits());
  ec.header.method = BitstreamHeader::kMethodEntropy;
  ec.header.num_symbols = static_cast<std::uint32_t>(qs.size());
  ec.header.initial_state = static_cast<std::uint8_t>(qs.initial_state);
  ec.shape = shape;
  ec.model = kind;
  ec.payload = encode_plane(plane, shape, *model);
  return ec;
}

QuantizedSeq entropy_decode_seq(const EntropyContainer& ec, const Codebook& cb,
                                const TrellisSpec& t) {
  if (ec.header.rate_bits != cb.rate_bits()) {
    throw FormatError("entropy container rate does not match codebook");
  }
  if (ec.header.initial_state >= TrellisSpec::kNumStates) {
    throw FormatError("entropy container initial_state out of range");
  }
  auto model = make_model(ec.model, cb.union_size());
  const std::vector<int> plane = decode_plane(ec.payload, ec.shape, *model);

  QuantizedSeq qs;
  qs.initial_state = ec.header.initial_state;
  qs.codeword_ids.resize(plane.size());
  qs.branch_bits.resize(plane.size());
  int state = qs.initial_state;
  for (std::size_t i = 0; i < plane.size(); ++i) {
    const int rank = plane[i];
    if (rank < 0 || rank >= cb.union_size()) {
      throw FormatError("decoded index outside the union alphabet");
    }
    const int id = cb.id_from_union_rank(t.state_union[state], rank);
    const Subset d = cb.subset_of(id);
    int q;
    if (t.branch_subset[state][0] == d) {
      q = 0;
    } else if (t.branch_subset[state][1] == d) {
      q = 1;
    } else {
      throw FormatError("decoded codeword matches no branch of the state");
    }
    qs.codeword_ids[i] = id;
    qs.branch_bits[i] = static_cast<std::uint8_t>(q);
    state = t.next_state[state][q];
  }
  return qs;
}

}  // namespace tcq
