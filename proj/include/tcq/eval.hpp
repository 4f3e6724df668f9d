#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tcq/codebook.hpp"
#include "tcq/entropy.hpp"
#include "tcq/matrix.hpp"
#include "tcq/trellis.hpp"

namespace tcq {

enum class SourceKind { Uniform, Gaussian, Laplacian, File };

// "uniform", "gaussian", "laplacian" or "file".
SourceKind source_kind_from_string(const std::string& name);
const char* to_string(SourceKind kind);

// Synthetic (or file-backed) benchmark input: samples total samples split
// into rows of seq_len each, one trellis sequence per row.
struct SourceSpec {
  SourceKind kind = SourceKind::Uniform;
  double v_min = -1.0;  // uniform support; gaussian/laplacian clip range
  double v_max = 1.0;
  double scale = 0.5;  // gaussian sigma / laplacian scale
  std::size_t samples = std::size_t{1} << 20;
  std::size_t seq_len = 4096;
  std::uint64_t seed = 1;
  std::filesystem::path path;  // kind == File
};

// Deterministic given the seed. Gaussian and laplacian draws are clamped to
// [v_min, v_max] so quantizer bounds always cover the data. File sources
// take dimensions from the file (one row per channel).
// Throws std::invalid_argument unless samples > 0 and seq_len divides it.
Matrix generate_source(const SourceSpec& spec);

enum class TensorFormat { RawF32, Pgm };

// .pgm selects Pgm, anything else RawF32.
TensorFormat tensor_format_from_path(const std::filesystem::path& path);

// In-memory tensor: one matrix row per channel, row length H*W.
struct LoadedTensor {
  Matrix samples;
  TensorShape shape;
};

// RawF32: 16-byte header {magic "TNSR", C, H, W as 4-byte unsigned
// little-endian}, then C*H*W float32 little-endian values.
// Pgm: binary P5, 8-bit, one channel; pixel v maps to 2v/255 - 1.
// Throws FormatError on malformed headers or short files (the message names
// expected vs actual byte counts).
LoadedTensor load_tensor(const std::filesystem::path& path, TensorFormat fmt);

void save_tensor_raw(const std::filesystem::path& path, const LoadedTensor& t);
// Single channel only; values clamp-rounded from [-1, 1] to 8-bit pixels.
void save_tensor_pgm(const std::filesystem::path& path, const LoadedTensor& t);

// Paired quality report for one quantizer at one rate. snr_db is
// 10*log10(signal_power/mse) over exactly the samples that produced mse;
// psnr_db uses the declared dynamic range (v_max - v_min) as peak.
// header_overhead_bits itemizes per-sequence side information (the trellis
// initial state byte) and is excluded from rate_bits and entropy_bpp.
struct RDReport {
  std::string quantizer;  // "TCQ" or "SQ"
  int rate_bits = 0;
  double header_overhead_bits = 0.0;  // bits per sequence
  double signal_power = 0.0;
  double mse = 0.0;
  double snr_db = 0.0;
  double psnr_db = 0.0;
  std::optional<double> entropy_bpp;  // achieved bits/symbol after AAC
  double elapsed_ms = 0.0;
};

struct CompareOptions {
  int rate_bits = 4;
  int method = 2;  // index plane fed to the entropy coder (1 or 2)
  std::optional<double> sigma;  // also measure the soft surrogate's MSE
  std::optional<ModelKind> entropy = ModelKind::Order0;
  int num_threads = 0;
};

struct CompareResult {
  RDReport tcq;
  RDReport sq;
  std::optional<double> soft_mse;
  double gain_db() const { return tcq.snr_db - sq.snr_db; }
};

// Quantizes every row with the trellis quantizer and the matched-rate scalar
// baseline; both see the identical matrix. Entropy bpp (when requested)
// codes each row as its own sequence with a fresh model.
CompareResult run_compare(const SourceSpec& spec, const CompareOptions& opt);

struct SweepOptions {
  std::vector<int> rates;
  int method = 2;
  std::optional<ModelKind> entropy = ModelKind::Order0;
  int num_threads = 0;
};

// One TCQ row then one SQ row per rate, in the order given.
// Throws std::invalid_argument on an empty rate list.
std::vector<RDReport> run_rd_sweep(const SourceSpec& spec,
                                   const SweepOptions& opt);

// CSV with the fixed header
//   quantizer,R,bits_per_symbol,mse,snr_db,psnr_db,entropy_bpp,elapsed_ms
// Doubles are printed with %.17g so parse_csv(to_csv(rows)) reproduces the
// values exactly; a missing entropy_bpp is an empty field.
std::string to_csv(const std::vector<RDReport>& rows);
std::vector<RDReport> parse_csv(const std::string& text);

// Throws std::invalid_argument when the path cannot be written.
void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

}  // namespace tcq
