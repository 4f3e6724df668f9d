#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tcq/conformance.hpp"
#include "tcq/entropy.hpp"
#include "tcq/eval.hpp"
#include "tcq/random.hpp"
#include "tcq/softquant.hpp"

namespace fs = std::filesystem;
using namespace tcq;

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
  out.flush();
  if (!out.good()) {
    throw std::invalid_argument("write failed for " + path.string());
  }
}

void save_output(const fs::path& path, const LoadedTensor& t) {
  if (tensor_format_from_path(path) == TensorFormat::Pgm) {
    save_tensor_pgm(path, t);
  } else {
    save_tensor_raw(path, t);
  }
}

TensorShape parse_shape(const std::string& s) {
  unsigned c = 0, h = 0, w = 0;
  char extra = 0;
  if (std::sscanf(s.c_str(), "%ux%ux%u%c", &c, &h, &w, &extra) != 3 ||
      c == 0 || h == 0 || w == 0) {
    throw std::invalid_argument("bad --shape \"" + s +
                                "\" (expected CxHxW, e.g. 1x512x768)");
  }
  return {c, h, w};
}

struct CodebookFlags {
  int rate = 2;
  double v_min = -1.0;
  double v_max = 1.0;
};

void add_codebook_flags(CLI::App* cmd, CodebookFlags& f, bool with_rate) {
  if (with_rate) {
    cmd->add_option("-r,--rate", f.rate, "bits per symbol R")
        ->check(CLI::Range(1, 16));
  }
  cmd->add_option("--vmin", f.v_min, "codebook lower bound");
  cmd->add_option("--vmax", f.v_max, "codebook upper bound");
}

struct SourceFlags {
  std::string source = "uniform";
  std::string input;
  double scale = 0.5;
  std::size_t samples = std::size_t{1} << 20;
  std::size_t seq_len = 4096;
  std::uint64_t seed = 1;
};

void add_source_flags(CLI::App* cmd, SourceFlags& f) {
  cmd->add_option("--source", f.source,
                  "uniform, gaussian, laplacian or file");
  cmd->add_option("--input", f.input, "tensor path when --source file");
  cmd->add_option("--scale", f.scale, "gaussian sigma / laplacian scale");
  cmd->add_option("--samples", f.samples, "total sample count");
  cmd->add_option("--seqlen", f.seq_len, "samples per trellis sequence");
  cmd->add_option("--seed", f.seed, "source seed");
}

SourceSpec make_spec(const SourceFlags& f, const CodebookFlags& cb) {
  SourceSpec spec;
  spec.kind = source_kind_from_string(f.source);
  spec.v_min = cb.v_min;
  spec.v_max = cb.v_max;
  spec.scale = f.scale;
  spec.samples = f.samples;
  spec.seq_len = f.seq_len;
  spec.seed = f.seed;
  spec.path = f.input;
  if (spec.kind == SourceKind::File && f.input.empty()) {
    throw std::invalid_argument("--source file requires --input");
  }
  return spec;
}

void print_report(const RDReport& r) {
  std::printf("%-4s R=%d  mse %.6g  snr %.3f dB  psnr %.3f dB",
              r.quantizer.c_str(), r.rate_bits, r.mse, r.snr_db, r.psnr_db);
  if (r.entropy_bpp) std::printf("  entropy %.4f bpp", *r.entropy_bpp);
  std::printf("  [%.1f ms]\n", r.elapsed_ms);
}

int cmd_quantize(const fs::path& in, const fs::path& out,
                 const CodebookFlags& f, int method) {
  const LoadedTensor lt = load_tensor(in, tensor_format_from_path(in));
  const Codebook cb(f.rate, f.v_min, f.v_max);
  const TrellisSpec t = default_trellis4();
  std::vector<std::uint8_t> bytes;
  double distortion = 0.0;
  for (std::size_t r = 0; r < lt.samples.rows; ++r) {
    const QuantizedSeq qs = viterbi_quantize(lt.samples.row(r), cb, t);
    distortion += qs.distortion;
    const Bitstream bs =
        method == 1 ? encode_method1(qs, cb, t) : encode_method2(qs, cb, t);
    const std::vector<std::uint8_t> rec = bs.to_bytes();
    bytes.insert(bytes.end(), rec.begin(), rec.end());
  }
  write_bytes(out, bytes);
  std::printf("%zu sequence(s), %zu bytes, mse %.6g\n", lt.samples.rows,
              bytes.size(),
              distortion / static_cast<double>(lt.samples.size()));
  return 0;
}

int cmd_dequantize(const fs::path& in, const fs::path& out,
                   const CodebookFlags& f, const std::string& shape_str) {
  const std::vector<std::uint8_t> bytes = read_bytes(in);
  const TrellisSpec t = default_trellis4();
  std::vector<std::vector<double>> rows;
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::span<const std::uint8_t> rest(bytes.data() + off,
                                             bytes.size() - off);
    const BitstreamHeader h = BitstreamHeader::parse(rest);
    const Codebook cb(h.rate_bits, f.v_min, f.v_max);
    QuantizedSeq qs;
    if (h.method == BitstreamHeader::kMethodEntropy) {
      const EntropyContainer ec = EntropyContainer::parse(rest);
      qs = entropy_decode_seq(ec, cb, t);
      off += BitstreamHeader::kSize + 13 + ec.payload.size();
    } else {
      const Bitstream bs = parse_bitstream(rest);
      qs = h.method == BitstreamHeader::kMethod1 ? decode_method1(bs, cb, t)
                                                 : decode_method2(bs, cb, t);
      off += record_size(h);
    }
    rows.push_back(reconstruct(qs, cb, t));
  }
  if (rows.empty()) throw FormatError(in.string() + ": no records");

  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  LoadedTensor lt;
  if (!shape_str.empty()) {
    lt.shape = parse_shape(shape_str);
  } else {
    lt.shape = {static_cast<std::uint32_t>(rows.size()), 1,
                static_cast<std::uint32_t>(rows[0].size())};
  }
  if (lt.shape.num_symbols() != total) {
    throw std::invalid_argument("shape covers " +
                                std::to_string(lt.shape.num_symbols()) +
                                " samples, records hold " +
                                std::to_string(total));
  }
  lt.samples = Matrix(lt.shape.c, static_cast<std::size_t>(lt.shape.h) *
                                      lt.shape.w);
  std::size_t pos = 0;
  for (const auto& r : rows) {
    for (double v : r) lt.samples.data[pos++] = v;
  }
  save_output(out, lt);
  std::printf("%zu sequence(s), %zu samples -> %s\n", rows.size(), total,
              out.string().c_str());
  return 0;
}

int cmd_entropy_encode(const fs::path& in, const fs::path& out,
                       const CodebookFlags& f, const std::string& model) {
  const LoadedTensor lt = load_tensor(in, tensor_format_from_path(in));
  const Codebook cb(f.rate, f.v_min, f.v_max);
  const TrellisSpec t = default_trellis4();
  const QuantizedSeq qs = viterbi_quantize(lt.samples.data, cb, t);
  const EntropyContainer ec = entropy_encode_seq(
      qs, cb, t, lt.shape, model_kind_from_string(model));
  const std::vector<std::uint8_t> bytes = ec.to_bytes();
  write_bytes(out, bytes);
  const double n = static_cast<double>(lt.shape.num_symbols());
  std::printf("%zu bytes, %.4f bits/symbol, mse %.6g\n", bytes.size(),
              8.0 * static_cast<double>(ec.payload.size()) / n,
              qs.distortion / n);
  return 0;
}

int cmd_entropy_decode(const fs::path& in, const fs::path& out,
                       const CodebookFlags& f) {
  const EntropyContainer ec = EntropyContainer::parse(read_bytes(in));
  const Codebook cb(ec.header.rate_bits, f.v_min, f.v_max);
  const TrellisSpec t = default_trellis4();
  const QuantizedSeq qs = entropy_decode_seq(ec, cb, t);
  LoadedTensor lt;
  lt.shape = ec.shape;
  lt.samples =
      Matrix(ec.shape.c, static_cast<std::size_t>(ec.shape.h) * ec.shape.w);
  const std::vector<double> values = reconstruct(qs, cb, t);
  lt.samples.data.assign(values.begin(), values.end());
  save_output(out, lt);
  std::printf("%ux%ux%u tensor -> %s\n", ec.shape.c, ec.shape.h, ec.shape.w,
              out.string().c_str());
  return 0;
}

std::optional<ModelKind> model_opt(const std::string& name) {
  if (name == "none") return std::nullopt;
  return model_kind_from_string(name);
}

int cmd_compare(const SourceFlags& src, const CodebookFlags& cbf, int method,
                const std::string& model, std::optional<double> sigma,
                int threads, const std::string& csv) {
  CompareOptions opt;
  opt.rate_bits = cbf.rate;
  opt.method = method;
  opt.sigma = sigma;
  opt.entropy = model_opt(model);
  opt.num_threads = threads;
  const CompareResult res = run_compare(make_spec(src, cbf), opt);
  print_report(res.tcq);
  print_report(res.sq);
  std::printf("gain %.4f dB\n", res.gain_db());
  if (res.soft_mse) std::printf("soft mse %.6g\n", *res.soft_mse);
  if (!csv.empty()) write_text_file(csv, to_csv({res.tcq, res.sq}));
  return 0;
}

int cmd_rd_sweep(const SourceFlags& src, const CodebookFlags& cbf,
                 const std::vector<int>& rates, int method,
                 const std::string& model, int threads,
                 const std::string& csv) {
  SweepOptions opt;
  opt.rates = rates;
  opt.method = method;
  opt.entropy = model_opt(model);
  opt.num_threads = threads;
  const std::vector<RDReport> rows = run_rd_sweep(make_spec(src, cbf), opt);
  for (const RDReport& r : rows) print_report(r);
  if (!csv.empty()) write_text_file(csv, to_csv(rows));
  return 0;
}

int cmd_softquant_check(double sigma, int trials, const CodebookFlags& f,
                        std::uint64_t seed) {
  const Codebook cb(f.rate, f.v_min, f.v_max);
  std::vector<double> pts(static_cast<std::size_t>(cb.size()));
  for (int j = 1; j <= cb.size(); ++j) pts[j - 1] = cb.point(j);
  std::mt19937_64 rng(seed);
  const double lo = f.v_min - 0.25 * (f.v_max - f.v_min);
  const double hi = f.v_max + 0.25 * (f.v_max - f.v_min);
  double max_rel = 0.0;
  for (int k = 0; k < trials; ++k) {
    double z = 0.0;
    for (bool ok = false; !ok;) {
      z = uniform_range(rng, lo, hi);
      ok = true;
      for (double c : pts) ok &= std::abs(z - c) > 1e-4;
    }
    const double analytic = soft_quantize_grad(z, pts, sigma);
    const double fd = finite_difference(
        [&](double x) { return soft_quantize(x, pts, sigma); }, z);
    max_rel = std::max(max_rel,
                       std::abs(analytic - fd) / std::max(1.0, std::abs(fd)));
  }
  const bool pass = max_rel < 1e-4;
  std::printf("%s sigma=%g trials=%d max_rel_err=%.3e\n",
              pass ? "ok" : "not ok", sigma, trials, max_rel);
  return pass ? 0 : 1;
}

int cmd_conformance(int trials, int seq_len, int max_rate,
                    std::uint64_t seed) {
  OracleConfig cfg;
  cfg.max_sequence_len = seq_len;
  cfg.max_rate = max_rate;
  cfg.trials = trials;
  cfg.seed = seed;
  const OracleReport rep = run_oracle_suite(cfg);
  for (const OracleCheck& c : rep.checks) {
    std::printf("%s %s trials=%d failures=%d\n",
                c.passed() ? "ok" : "not ok", c.name.c_str(), c.trials,
                c.failures);
    if (!c.passed()) std::printf("  %s\n", c.counterexample.c_str());
  }
  std::printf("%s\n", rep.all_passed() ? "all checks passed"
                                       : "some checks failed");
  return rep.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trellis coded quantization toolkit"};
  app.require_subcommand(1);

  std::string in, out, shape, model = "order0", trellis = "default4";
  std::string csv;
  CodebookFlags cbf;
  SourceFlags src;
  int method = 2;
  int threads = 0;
  int trials = 10000;
  double sigma = 10.0;
  std::uint64_t seed = 1;
  std::vector<int> rates = {1, 2, 3, 4};

  CLI::App* quantize = app.add_subcommand(
      "quantize", "trellis-quantize a tensor into a .tcq bitstream");
  quantize->add_option("input", in, "input tensor (.pgm or raw)")->required();
  quantize->add_option("output", out, "output .tcq path")->required();
  add_codebook_flags(quantize, cbf, true);
  quantize->add_option("-m,--method", method, "index coding (1 or 2)")
      ->check(CLI::Range(1, 2));
  quantize->add_option("--trellis", trellis, "trellis table (default4)")
      ->check(CLI::IsMember({"default4"}));

  CLI::App* dequantize = app.add_subcommand(
      "dequantize", "reconstruct a tensor from a .tcq bitstream");
  dequantize->add_option("input", in, "input .tcq path")->required();
  dequantize->add_option("output", out, "output tensor (.pgm or raw)")
      ->required();
  add_codebook_flags(dequantize, cbf, false);
  dequantize->add_option("--shape", shape, "output shape CxHxW");

  CLI::App* eenc = app.add_subcommand(
      "entropy-encode", "quantize and arithmetic-code a tensor");
  eenc->add_option("input", in, "input tensor (.pgm or raw)")->required();
  eenc->add_option("output", out, "output .tcq path")->required();
  add_codebook_flags(eenc, cbf, true);
  eenc->add_option("--model", model, "static, order0 or neighbor")
      ->check(CLI::IsMember({"static", "order0", "neighbor"}));

  CLI::App* edec = app.add_subcommand(
      "entropy-decode", "decode an entropy-coded .tcq container");
  edec->add_option("input", in, "input .tcq path")->required();
  edec->add_option("output", out, "output tensor (.pgm or raw)")->required();
  add_codebook_flags(edec, cbf, false);

  CLI::App* compare = app.add_subcommand(
      "compare", "paired TCQ vs SQ quality report on one source");
  add_source_flags(compare, src);
  add_codebook_flags(compare, cbf, true);
  compare->add_option("-m,--method", method, "index plane fed to the coder")
      ->check(CLI::Range(1, 2));
  compare->add_option("--model", model,
                      "entropy model (static, order0, neighbor, none)")
      ->check(CLI::IsMember({"static", "order0", "neighbor", "none"}));
  double sigma_flag = 0.0;
  CLI::Option* sigma_opt = compare->add_option(
      "--sigma", sigma_flag, "also report the soft surrogate's mse");
  compare->add_option("--threads", threads, "worker threads (0 = auto)");
  compare->add_option("--csv", csv, "write the two report rows as CSV");

  CLI::App* sweep = app.add_subcommand(
      "rd-sweep", "rate-distortion sweep over several rates");
  add_source_flags(sweep, src);
  add_codebook_flags(sweep, cbf, false);
  sweep->add_option("--rates", rates, "rates to sweep")->delimiter(',');
  sweep->add_option("-m,--method", method, "index plane fed to the coder")
      ->check(CLI::Range(1, 2));
  sweep->add_option("--model", model,
                    "entropy model (static, order0, neighbor, none)")
      ->check(CLI::IsMember({"static", "order0", "neighbor", "none"}));
  sweep->add_option("--threads", threads, "worker threads (0 = auto)");
  sweep->add_option("--csv", csv, "write report rows as CSV");

  CLI::App* sqc = app.add_subcommand(
      "softquant-check", "gradient check of the soft quantizer");
  sqc->add_option("--sigma", sigma, "softness parameter");
  sqc->add_option("--trials", trials, "random points to test")
      ->check(CLI::PositiveNumber);
  add_codebook_flags(sqc, cbf, true);
  sqc->add_option("--seed", seed, "rng seed");

  int c_trials = 500, c_len = 8, c_rate = 2;
  CLI::App* conf = app.add_subcommand(
      "conformance", "run the oracle suite against the library");
  conf->add_option("--trials", c_trials, "trials per check")
      ->check(CLI::PositiveNumber);
  conf->add_option("--seq-len", c_len, "max sequence length (<= 12)");
  conf->add_option("--max-rate", c_rate, "max rate for the trellis oracle");
  conf->add_option("--seed", seed, "suite seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*quantize) return cmd_quantize(in, out, cbf, method);
    if (*dequantize) return cmd_dequantize(in, out, cbf, shape);
    if (*eenc) return cmd_entropy_encode(in, out, cbf, model);
    if (*edec) return cmd_entropy_decode(in, out, cbf);
    if (*compare) {
      const std::optional<double> s =
          sigma_opt->count() ? std::optional<double>(sigma_flag)
                             : std::nullopt;
      return cmd_compare(src, cbf, method, model, s, threads, csv);
    }
    if (*sweep) return cmd_rd_sweep(src, cbf, rates, method, model, threads,
                                    csv);
    if (*sqc) return cmd_softquant_check(sigma, trials, cbf, seed);
    if (*conf) return cmd_conformance(c_trials, c_len, c_rate, seed);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
