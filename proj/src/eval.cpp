#include "tcq/eval.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tcq/indexing.hpp"
#include "tcq/random.hpp"
#include "tcq/softquant.hpp"

namespace tcq {

SourceKind source_kind_from_string(const std::string& name) {
  if (name == "uniform") return SourceKind::Uniform;
  if (name == "gaussian") return SourceKind::Gaussian;
  if (name == "laplacian") return SourceKind::Laplacian;
  if (name == "file") return SourceKind::File;
  throw std::invalid_argument(
      "unknown source \"" + name +
      "\" (expected uniform, gaussian, laplacian or file)");
}

const char* to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::Uniform: return "uniform";
    case SourceKind::Gaussian: return "gaussian";
    case SourceKind::Laplacian: return "laplacian";
    case SourceKind::File: return "file";
  }
  return "?";
}

TensorFormat tensor_format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".pgm" ? TensorFormat::Pgm : TensorFormat::RawF32;
}

Matrix generate_source(const SourceSpec& spec) {
  if (spec.kind == SourceKind::File) {
    return load_tensor(spec.path, tensor_format_from_path(spec.path)).samples;
  }
  if (spec.samples == 0 || spec.seq_len == 0 ||
      spec.samples % spec.seq_len != 0) {
    throw std::invalid_argument(
        "generate_source: samples must be a positive multiple of seq_len");
  }
  if (!(spec.v_min < spec.v_max)) {
    throw std::invalid_argument("generate_source: v_min must be < v_max");
  }
  if (spec.kind != SourceKind::Uniform && !(spec.scale > 0.0)) {
    throw std::invalid_argument("generate_source: scale must be positive");
  }
  Matrix m(spec.samples / spec.seq_len, spec.seq_len);
  std::mt19937_64 rng(spec.seed);
  for (double& z : m.data) {
    switch (spec.kind) {
      case SourceKind::Uniform:
        z = uniform_range(rng, spec.v_min, spec.v_max);
        break;
      case SourceKind::Gaussian:
        z = std::clamp(spec.scale * gaussian(rng), spec.v_min, spec.v_max);
        break;
      default:
        z = std::clamp(laplacian(rng, spec.scale), spec.v_min, spec.v_max);
        break;
    }
  }
  return m;
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

std::uint32_t read_u32_le(const std::uint8_t* b) {
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void append_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

LoadedTensor load_raw(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes) {
  constexpr std::size_t kHeader = 16;
  if (bytes.size() < kHeader) {
    std::ostringstream os;
    os << path.string() << ": raw tensor header expected " << kHeader
       << " bytes, got " << bytes.size();
    throw FormatError(os.str());
  }
  if (bytes[0] != 'T' || bytes[1] != 'N' || bytes[2] != 'S' ||
      bytes[3] != 'R') {
    throw FormatError(path.string() + ": bad magic (expected \"TNSR\")");
  }
  LoadedTensor t;
  t.shape.c = read_u32_le(bytes.data() + 4);
  t.shape.h = read_u32_le(bytes.data() + 8);
  t.shape.w = read_u32_le(bytes.data() + 12);
  if (t.shape.c == 0 || t.shape.h == 0 || t.shape.w == 0) {
    throw FormatError(path.string() + ": zero tensor dimension");
  }
  const std::size_t need = 4 * t.shape.num_symbols();
  if (bytes.size() - kHeader < need) {
    std::ostringstream os;
    os << path.string() << ": truncated raw tensor, expected " << need
       << " data bytes, got " << bytes.size() - kHeader;
    throw FormatError(os.str());
  }
  t.samples = Matrix(t.shape.c, static_cast<std::size_t>(t.shape.h) * t.shape.w);
  for (std::size_t i = 0; i < t.shape.num_symbols(); ++i) {
    const std::uint32_t u = read_u32_le(bytes.data() + kHeader + 4 * i);
    t.samples.data[i] = static_cast<double>(std::bit_cast<float>(u));
  }
  return t;
}

// Reads the next PGM header token, skipping whitespace and # comments.
std::string pgm_token(const std::vector<std::uint8_t>& bytes,
                      std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string tok;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) {
    tok.push_back(static_cast<char>(bytes[pos++]));
  }
  return tok;
}

std::uint32_t pgm_number(const std::vector<std::uint8_t>& bytes,
                         std::size_t& pos, const char* what) {
  const std::string tok = pgm_token(bytes, pos);
  if (tok.empty() ||
      tok.find_first_not_of("0123456789") != std::string::npos) {
    throw FormatError(std::string("PGM header: bad ") + what + " \"" + tok +
                      "\"");
  }
  const unsigned long v = std::strtoul(tok.c_str(), nullptr, 10);
  if (v == 0 || v > 0xFFFFFFFFul) {
    throw FormatError(std::string("PGM header: ") + what + " out of range");
  }
  return static_cast<std::uint32_t>(v);
}

LoadedTensor load_pgm(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  if (pgm_token(bytes, pos) != "P5") {
    throw FormatError(path.string() + ": not a binary PGM (expected P5)");
  }
  LoadedTensor t;
  t.shape.c = 1;
  t.shape.w = pgm_number(bytes, pos, "width");
  t.shape.h = pgm_number(bytes, pos, "height");
  const std::uint32_t maxval = pgm_number(bytes, pos, "maxval");
  if (maxval != 255) {
    throw FormatError(path.string() + ": only 8-bit PGM supported");
  }
  ++pos;  // the single whitespace byte after maxval
  const std::size_t need = static_cast<std::size_t>(t.shape.h) * t.shape.w;
  if (pos > bytes.size() || bytes.size() - pos < need) {
    std::ostringstream os;
    os << path.string() << ": truncated PGM raster, expected " << need
       << " bytes, got " << (pos > bytes.size() ? 0 : bytes.size() - pos);
    throw FormatError(os.str());
  }
  t.samples = Matrix(1, need);
  for (std::size_t i = 0; i < need; ++i) {
    t.samples.data[i] = 2.0 * bytes[pos + i] / 255.0 - 1.0;
  }
  return t;
}

void require_shape_match(const LoadedTensor& t, const char* op) {
  const std::size_t plane = static_cast<std::size_t>(t.shape.h) * t.shape.w;
  if (t.samples.rows != t.shape.c || t.samples.cols != plane) {
    throw std::invalid_argument(std::string(op) +
                                ": matrix does not match the declared shape");
  }
}

}  // namespace

LoadedTensor load_tensor(const std::filesystem::path& path, TensorFormat fmt) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  return fmt == TensorFormat::Pgm ? load_pgm(path, bytes)
                                  : load_raw(path, bytes);
}

void save_tensor_raw(const std::filesystem::path& path,
                     const LoadedTensor& t) {
  require_shape_match(t, "save_tensor_raw");
  std::string out;
  out.reserve(16 + 4 * t.samples.size());
  out += "TNSR";
  append_u32_le(out, t.shape.c);
  append_u32_le(out, t.shape.h);
  append_u32_le(out, t.shape.w);
  for (double z : t.samples.data) {
    append_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(z)));
  }
  write_text_file(path, out);
}

void save_tensor_pgm(const std::filesystem::path& path,
                     const LoadedTensor& t) {
  require_shape_match(t, "save_tensor_pgm");
  if (t.shape.c != 1) {
    throw std::invalid_argument("save_tensor_pgm: PGM holds one channel");
  }
  std::ostringstream header;
  header << "P5\n" << t.shape.w << " " << t.shape.h << "\n255\n";
  std::string out = header.str();
  out.reserve(out.size() + t.samples.size());
  for (double z : t.samples.data) {
    const double v = std::round((z + 1.0) * 255.0 / 2.0);
    out.push_back(static_cast<char>(
        static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0))));
  }
  write_text_file(path, out);
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

double power_of(const Matrix& m) {
  double sum = 0.0;
  for (double z : m.data) sum += z * z;
  return sum / static_cast<double>(m.size());
}

double snr_db_of(double power, double mse) {
  return 10.0 * std::log10(power / mse);
}

void check_compare_args(int rate_bits, int method) {
  if (rate_bits < 1 || rate_bits > 8) {
    throw std::invalid_argument("rate must be in [1, 8]");
  }
  if (method != 1 && method != 2) {
    throw std::invalid_argument("method must be 1 or 2");
  }
}

RDReport measure_tcq(const Matrix& m, const Codebook& cb, const TrellisSpec& t,
                     const CompareOptions& opt, double power, double peak) {
  const auto start = Clock::now();
  const std::vector<QuantizedSeq> rows =
      quantize_batch(m, cb, t, opt.num_threads);
  double err = 0.0;
  for (const QuantizedSeq& qs : rows) err += qs.distortion;

  RDReport r;
  r.quantizer = "TCQ";
  r.rate_bits = cb.rate_bits();
  r.header_overhead_bits = 8.0;  // the per-sequence initial-state byte
  r.signal_power = power;
  r.mse = err / static_cast<double>(m.size());
  r.snr_db = snr_db_of(power, r.mse);
  r.psnr_db = snr_db_of(peak * peak, r.mse);
  if (opt.entropy) {
    std::size_t bits = 0;
    for (const QuantizedSeq& qs : rows) {
      const std::vector<int> plane = opt.method == 2
                                         ? index_plane_method2(qs, cb, t)
                                         : method1_codes(qs, cb, t);
      auto model = make_model(*opt.entropy, cb.union_size());
      bits += 8 * ac_encode(plane, *model).size();
    }
    r.entropy_bpp = static_cast<double>(bits) / static_cast<double>(m.size());
  }
  r.elapsed_ms = ms_since(start);
  return r;
}

RDReport measure_sq(const Matrix& m, const ScalarQuantizer& sq,
                    const CompareOptions& opt, double power, double peak) {
  const auto start = Clock::now();
  double err = 0.0;
  std::vector<int> symbols(opt.entropy ? m.cols : 0);
  std::size_t bits = 0;
  for (std::size_t row = 0; row < m.rows; ++row) {
    const auto seq = m.row(row);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const ScalarQuantizer::Result res = sq.quantize(seq[i]);
      const double e = seq[i] - res.value;
      err += e * e;
      if (opt.entropy) symbols[i] = res.index - 1;
    }
    if (opt.entropy) {
      auto model = make_model(*opt.entropy, sq.num_levels());
      bits += 8 * ac_encode(symbols, *model).size();
    }
  }

  RDReport r;
  r.quantizer = "SQ";
  r.rate_bits = sq.rate_bits();
  r.header_overhead_bits = 0.0;
  r.signal_power = power;
  r.mse = err / static_cast<double>(m.size());
  r.snr_db = snr_db_of(power, r.mse);
  r.psnr_db = snr_db_of(peak * peak, r.mse);
  if (opt.entropy) {
    r.entropy_bpp = static_cast<double>(bits) / static_cast<double>(m.size());
  }
  r.elapsed_ms = ms_since(start);
  return r;
}

}  // namespace

CompareResult run_compare(const SourceSpec& spec, const CompareOptions& opt) {
  check_compare_args(opt.rate_bits, opt.method);
  const Matrix m = generate_source(spec);
  const double power = power_of(m);
  const double peak = spec.v_max - spec.v_min;
  const Codebook cb(opt.rate_bits, spec.v_min, spec.v_max);
  const ScalarQuantizer sq(opt.rate_bits, spec.v_min, spec.v_max);
  const TrellisSpec t = default_trellis4();

  CompareResult result;
  result.tcq = measure_tcq(m, cb, t, opt, power, peak);
  result.sq = measure_sq(m, sq, opt, power, peak);
  if (opt.sigma) {
    const SoftQuantConfig cfg(cb, *opt.sigma);
    double err = 0.0;
    for (double z : m.data) {
      const double e = z - soft_quantize(z, cfg);
      err += e * e;
    }
    result.soft_mse = err / static_cast<double>(m.size());
  }
  return result;
}

std::vector<RDReport> run_rd_sweep(const SourceSpec& spec,
                                   const SweepOptions& opt) {
  if (opt.rates.empty()) {
    throw std::invalid_argument("run_rd_sweep: empty rate list");
  }
  std::vector<RDReport> rows;
  rows.reserve(2 * opt.rates.size());
  for (int r : opt.rates) {
    CompareOptions copt;
    copt.rate_bits = r;
    copt.method = opt.method;
    copt.entropy = opt.entropy;
    copt.num_threads = opt.num_threads;
    const CompareResult res = run_compare(spec, copt);
    rows.push_back(res.tcq);
    rows.push_back(res.sq);
  }
  return rows;
}

namespace {

constexpr const char* kCsvHeader =
    "quantizer,R,bits_per_symbol,mse,snr_db,psnr_db,entropy_bpp,elapsed_ms";

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = line.find(sep, start);
    fields.push_back(line.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return fields;
}

double parse_double(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty()) {
    throw FormatError(std::string("CSV: bad ") + what + " \"" + s + "\"");
  }
  return v;
}

}  // namespace

std::string to_csv(const std::vector<RDReport>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const RDReport& r : rows) {
    out += r.quantizer;
    out += ',' + std::to_string(r.rate_bits);
    out += ',' + std::to_string(r.rate_bits);
    out += ',' + fmt_g17(r.mse);
    out += ',' + fmt_g17(r.snr_db);
    out += ',' + fmt_g17(r.psnr_db);
    out += ',';
    if (r.entropy_bpp) out += fmt_g17(*r.entropy_bpp);
    out += ',' + fmt_g17(r.elapsed_ms);
    out += '\n';
  }
  return out;
}

std::vector<RDReport> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw FormatError("CSV: missing or unexpected header line");
  }
  std::vector<RDReport> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 8) {
      throw FormatError("CSV: expected 8 fields, got " +
                        std::to_string(f.size()));
    }
    RDReport r;
    r.quantizer = f[0];
    r.rate_bits = static_cast<int>(parse_double(f[1], "R"));
    if (parse_double(f[2], "bits_per_symbol") != r.rate_bits) {
      throw FormatError("CSV: bits_per_symbol disagrees with R");
    }
    r.mse = parse_double(f[3], "mse");
    r.snr_db = parse_double(f[4], "snr_db");
    r.psnr_db = parse_double(f[5], "psnr_db");
    if (!f[6].empty()) r.entropy_bpp = parse_double(f[6], "entropy_bpp");
    r.elapsed_ms = parse_double(f[7], "elapsed_ms");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot write " + path.string());
  }
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) {
    throw std::invalid_argument("write failed for " + path.string());
  }
}

}  // namespace tcq
