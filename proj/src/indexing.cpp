#include "tcq/indexing.hpp"

#include <sstream>
#include <stdexcept>

namespace tcq {

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

void require_consistent(const QuantizedSeq& qs, const Codebook& cb,
                        const TrellisSpec& t, const char* op) {
  if (!is_path_consistent(qs, cb, t)) {
    throw std::invalid_argument(std::string(op) + ": inconsistent path");
  }
}

BitstreamHeader make_header(const QuantizedSeq& qs, const Codebook& cb,
                            std::uint8_t method) {
  BitstreamHeader h;
  h.rate_bits = static_cast<std::uint8_t>(cb.rate_bits());
  h.method = method;
  h.num_symbols = static_cast<std::uint32_t>(qs.size());
  h.initial_state = static_cast<std::uint8_t>(qs.initial_state);
  return h;
}

// Header checks shared by both decoders.
void check_decodable(const Bitstream& bs, const Codebook& cb,
                     std::uint8_t method, const char* op) {
  const BitstreamHeader& h = bs.header;
  if (h.method != method) {
    std::ostringstream os;
    os << op << ": method mismatch (header says " << int(h.method)
       << ", expected " << int(method) << ")";
    throw FormatError(os.str());
  }
  if (h.rate_bits != cb.rate_bits()) {
    std::ostringstream os;
    os << op << ": rate mismatch (header R=" << int(h.rate_bits)
       << ", codebook R=" << cb.rate_bits() << ")";
    throw FormatError(os.str());
  }
  if (h.initial_state >= TrellisSpec::kNumStates) {
    throw FormatError(std::string(op) + ": initial_state out of range");
  }
  const std::size_t need = (bs.payload_bits() + 7) / 8;
  if (bs.payload.size() < need) {
    std::ostringstream os;
    os << op << ": truncated payload (" << bs.payload.size() << " bytes, need "
       << need << ")";
    throw FormatError(os.str());
  }
}

}  // namespace

void BitstreamHeader::append_to(std::vector<std::uint8_t>& out) const {
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(version);
  out.push_back(rate_bits);
  out.push_back(method);
  append_u32_be(out, num_symbols);
  out.push_back(initial_state);
}

BitstreamHeader BitstreamHeader::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kSize) {
    throw FormatError("bitstream header truncated");
  }
  for (std::size_t i = 0; i < kMagic.size(); ++i) {
    if (bytes[i] != kMagic[i]) {
      throw FormatError("bad magic (expected \"TCQ1\")");
    }
  }
  BitstreamHeader h;
  h.version = bytes[4];
  if (h.version != kVersion) {
    std::ostringstream os;
    os << "unsupported bitstream version " << int(h.version);
    throw FormatError(os.str());
  }
  h.rate_bits = bytes[5];
  if (h.rate_bits < 1 || h.rate_bits > 16) {
    throw FormatError("header rate_bits out of range [1,16]");
  }
  h.method = bytes[6];
  if (h.method < 1 || h.method > 3) {
    throw FormatError("header method must be 1, 2 or 3");
  }
  h.num_symbols = read_u32_be(bytes, 7);
  h.initial_state = bytes[11];
  return h;
}

std::vector<std::uint8_t> Bitstream::to_bytes() const {
  std::vector<std::uint8_t> out;
  out.reserve(BitstreamHeader::kSize + payload.size());
  header.append_to(out);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::size_t record_size(const BitstreamHeader& h) {
  const std::size_t bits =
      static_cast<std::size_t>(h.num_symbols) * h.rate_bits;
  return BitstreamHeader::kSize + (bits + 7) / 8;
}

Bitstream parse_bitstream(std::span<const std::uint8_t> bytes) {
  Bitstream bs;
  bs.header = BitstreamHeader::parse(bytes);
  if (bs.header.method == BitstreamHeader::kMethodEntropy) {
    throw FormatError("record is an entropy container, not an index bitstream");
  }
  const std::size_t total = record_size(bs.header);
  if (bytes.size() < total) {
    std::ostringstream os;
    os << "truncated record: header announces " << total << " bytes, got "
       << bytes.size();
    throw FormatError(os.str());
  }
  bs.payload.assign(bytes.begin() + BitstreamHeader::kSize,
                    bytes.begin() + static_cast<std::ptrdiff_t>(total));
  return bs;
}

Bitstream encode_method1(const QuantizedSeq& qs, const Codebook& cb,
                         const TrellisSpec& t) {
  require_consistent(qs, cb, t, "encode_method1");
  Bitstream bs;
  bs.header = make_header(qs, cb, BitstreamHeader::kMethod1);
  BitWriter w;
  const int rank_bits = cb.rate_bits() - 1;
  for (std::size_t i = 0; i < qs.size(); ++i) {
    w.put_bit(qs.branch_bits[i]);
    w.put_bits(static_cast<std::uint32_t>(cb.rank_in_subset(qs.codeword_ids[i])),
               rank_bits);
  }
  bs.payload = w.finish();
  return bs;
}

QuantizedSeq decode_method1(const Bitstream& bs, const Codebook& cb,
                            const TrellisSpec& t) {
  check_decodable(bs, cb, BitstreamHeader::kMethod1, "decode_method1");
  const std::size_t n = bs.header.num_symbols;
  const int rank_bits = cb.rate_bits() - 1;
  BitReader r(bs.payload);
  QuantizedSeq qs;
  qs.initial_state = bs.header.initial_state;
  qs.codeword_ids.resize(n);
  qs.branch_bits.resize(n);
  int state = qs.initial_state;
  for (std::size_t i = 0; i < n; ++i) {
    const int q = r.get_bit();
    const int rank = static_cast<int>(r.get_bits(rank_bits));
    qs.branch_bits[i] = static_cast<std::uint8_t>(q);
    qs.codeword_ids[i] = cb.id_from_subset_rank(t.branch_subset[state][q], rank);
    state = t.next_state[state][q];
  }
  return qs;
}

Bitstream encode_method2(const QuantizedSeq& qs, const Codebook& cb,
                         const TrellisSpec& t) {
  require_consistent(qs, cb, t, "encode_method2");
  Bitstream bs;
  bs.header = make_header(qs, cb, BitstreamHeader::kMethod2);
  BitWriter w;
  const int bits = cb.rate_bits();
  for (std::size_t i = 0; i < qs.size(); ++i) {
    w.put_bits(static_cast<std::uint32_t>(cb.rank_in_union(qs.codeword_ids[i])),
               bits);
  }
  bs.payload = w.finish();
  return bs;
}

QuantizedSeq decode_method2(const Bitstream& bs, const Codebook& cb,
                            const TrellisSpec& t) {
  check_decodable(bs, cb, BitstreamHeader::kMethod2, "decode_method2");
  const std::size_t n = bs.header.num_symbols;
  const int bits = cb.rate_bits();
  BitReader r(bs.payload);
  QuantizedSeq qs;
  qs.initial_state = bs.header.initial_state;
  qs.codeword_ids.resize(n);
  qs.branch_bits.resize(n);
  int state = qs.initial_state;
  for (std::size_t i = 0; i < n; ++i) {
    const int rank = static_cast<int>(r.get_bits(bits));
    const int id = cb.id_from_union_rank(t.state_union[state], rank);
    const Subset d = cb.subset_of(id);
    int q;
    if (t.branch_subset[state][0] == d) {
      q = 0;
    } else if (t.branch_subset[state][1] == d) {
      q = 1;
    } else {
      std::ostringstream os;
      os << "decode_method2: codeword subset " << to_string(d)
         << " matches no branch of state " << state;
      throw FormatError(os.str());
    }
    qs.codeword_ids[i] = id;
    qs.branch_bits[i] = static_cast<std::uint8_t>(q);
    state = t.next_state[state][q];
  }
  return qs;
}

std::vector<int> index_plane_method2(const QuantizedSeq& qs, const Codebook& cb,
                                     const TrellisSpec& t) {
  require_consistent(qs, cb, t, "index_plane_method2");
  std::vector<int> plane(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    plane[i] = cb.rank_in_union(qs.codeword_ids[i]);
  }
  return plane;
}

std::vector<int> method1_codes(const QuantizedSeq& qs, const Codebook& cb,
                               const TrellisSpec& t) {
  require_consistent(qs, cb, t, "method1_codes");
  const int rank_bits = cb.rate_bits() - 1;
  std::vector<int> codes(qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    codes[i] = (static_cast<int>(qs.branch_bits[i]) << rank_bits) |
               cb.rank_in_subset(qs.codeword_ids[i]);
  }
  return codes;
}

}  // namespace tcq
