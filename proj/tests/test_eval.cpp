#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "tcq/eval.hpp"

using namespace tcq;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tcq_eval_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& b) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(b.data()),
            static_cast<std::streamsize>(b.size()));
  REQUIRE(out.good());
}

std::vector<std::uint8_t> pgm_bytes(const std::string& header,
                                    const std::vector<std::uint8_t>& raster) {
  std::vector<std::uint8_t> b(header.begin(), header.end());
  b.insert(b.end(), raster.begin(), raster.end());
  return b;
}

}  // namespace

TEST_CASE("source kinds parse and print") {
  for (const char* name : {"uniform", "gaussian", "laplacian", "file"}) {
    CHECK(to_string(source_kind_from_string(name)) == std::string(name));
  }
  CHECK_THROWS_AS(source_kind_from_string("cauchy"), std::invalid_argument);
}

TEST_CASE("generate_source is deterministic and in range") {
  SourceSpec spec;
  spec.samples = 1 << 16;
  spec.seq_len = 1 << 10;
  spec.seed = 5;
  const Matrix a = generate_source(spec);
  const Matrix b = generate_source(spec);
  CHECK(a.data == b.data);
  CHECK(a.rows == 64);
  CHECK(a.cols == 1024);
  for (double z : a.data) {
    CHECK(z >= spec.v_min);
    CHECK(z < spec.v_max);
  }
  spec.seed = 6;
  CHECK(generate_source(spec).data != a.data);
}

TEST_CASE("uniform source mean at the frozen seed") {
  SourceSpec spec;
  spec.samples = 1000000;
  spec.seq_len = 1000;
  spec.seed = 42;
  const Matrix m = generate_source(spec);
  const double mean =
      std::accumulate(m.data.begin(), m.data.end(), 0.0) /
      static_cast<double>(m.data.size());
  CHECK(std::abs(mean) <= 0.003);
}

TEST_CASE("gaussian and laplacian draws are clamped") {
  SourceSpec spec;
  spec.kind = SourceKind::Gaussian;
  spec.v_min = -0.2;
  spec.v_max = 0.2;
  spec.scale = 0.5;
  spec.samples = 4096;
  spec.seq_len = 512;
  for (SourceKind k : {SourceKind::Gaussian, SourceKind::Laplacian}) {
    spec.kind = k;
    const Matrix m = generate_source(spec);
    for (double z : m.data) {
      CHECK(z >= -0.2);
      CHECK(z <= 0.2);
    }
  }
}

TEST_CASE("generate_source validates its spec") {
  SourceSpec spec;
  spec.samples = 1000;
  spec.seq_len = 300;
  CHECK_THROWS_AS(generate_source(spec), std::invalid_argument);
  spec.seq_len = 0;
  CHECK_THROWS_AS(generate_source(spec), std::invalid_argument);
  spec.seq_len = 100;
  spec.v_min = 1.0;
  spec.v_max = -1.0;
  CHECK_THROWS_AS(generate_source(spec), std::invalid_argument);
  spec.v_min = -1.0;
  spec.v_max = 1.0;
  spec.kind = SourceKind::Gaussian;
  spec.scale = 0.0;
  CHECK_THROWS_AS(generate_source(spec), std::invalid_argument);
}

TEST_CASE("pgm load maps pixels to [-1, 1]") {
  const fs::path p = temp_file("map.pgm");
  write_bytes(p, pgm_bytes("P5\n2 2\n255\n", {0, 255, 128, 64}));
  const LoadedTensor t = load_tensor(p, TensorFormat::Pgm);
  CHECK((t.shape == TensorShape{1, 2, 2}));
  REQUIRE(t.samples.rows == 1);
  REQUIRE(t.samples.cols == 4);
  CHECK(t.samples.at(0, 0) == -1.0);
  CHECK(t.samples.at(0, 1) == 1.0);
  CHECK(t.samples.at(0, 2) == 2.0 * 128 / 255.0 - 1.0);
  CHECK(t.samples.at(0, 3) == 2.0 * 64 / 255.0 - 1.0);

  const fs::path pc = temp_file("comment.pgm");
  write_bytes(pc, pgm_bytes("P5\n# witty remark\n2 1\n# more\n255\n", {7, 9}));
  const LoadedTensor tc = load_tensor(pc, TensorFormat::Pgm);
  CHECK((tc.shape == TensorShape{1, 1, 2}));
}

TEST_CASE("pgm loader rejects malformed files") {
  const fs::path bad_magic = temp_file("bad_magic.pgm");
  write_bytes(bad_magic, pgm_bytes("P6\n2 2\n255\n", {0, 0, 0, 0}));
  CHECK_THROWS_AS(load_tensor(bad_magic, TensorFormat::Pgm), FormatError);

  const fs::path bad_maxval = temp_file("bad_maxval.pgm");
  write_bytes(bad_maxval, pgm_bytes("P5\n2 2\n65535\n", {0, 0, 0, 0}));
  CHECK_THROWS_AS(load_tensor(bad_maxval, TensorFormat::Pgm), FormatError);

  const fs::path shortpgm = temp_file("short.pgm");
  write_bytes(shortpgm, pgm_bytes("P5\n2 2\n255\n", {0, 0, 0}));
  CHECK_THROWS_WITH_AS(load_tensor(shortpgm, TensorFormat::Pgm),
                       doctest::Contains("expected"), FormatError);

  CHECK_THROWS_AS(load_tensor(temp_file("absent.pgm"), TensorFormat::Pgm),
                  FormatError);
}

TEST_CASE("raw tensor round trip is bit exact") {
  LoadedTensor t;
  t.shape = {2, 1, 3};
  t.samples = Matrix(2, 3);
  const std::vector<double> vals = {0.5, -0.25, 1.0, -1.0, 0.125, 0.75};
  t.samples.data = vals;
  const fs::path p = temp_file("roundtrip.tnsr");
  save_tensor_raw(p, t);
  const LoadedTensor back = load_tensor(p, TensorFormat::RawF32);
  CHECK(back.shape == t.shape);
  CHECK(back.samples.data == vals);
  CHECK(tensor_format_from_path(p) == TensorFormat::RawF32);
  CHECK(tensor_format_from_path("x.pgm") == TensorFormat::Pgm);
}

TEST_CASE("raw tensor loader rejects malformed files") {
  const fs::path short_header = temp_file("short_header.tnsr");
  write_bytes(short_header, {'T', 'N', 'S', 'R', 1, 0});
  CHECK_THROWS_WITH_AS(load_tensor(short_header, TensorFormat::RawF32),
                       doctest::Contains("expected"), FormatError);

  const fs::path bad_magic = temp_file("bad_magic.tnsr");
  write_bytes(bad_magic, {'B', 'L', 'O', 'B', 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0,
                          0, 0, 0, 0, 0});
  CHECK_THROWS_AS(load_tensor(bad_magic, TensorFormat::RawF32), FormatError);

  const fs::path zero_dim = temp_file("zero_dim.tnsr");
  write_bytes(zero_dim,
              {'T', 'N', 'S', 'R', 0, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0});
  CHECK_THROWS_AS(load_tensor(zero_dim, TensorFormat::RawF32), FormatError);

  const fs::path short_data = temp_file("short_data.tnsr");
  write_bytes(short_data, {'T', 'N', 'S', 'R', 1, 0, 0, 0, 1, 0, 0, 0, 2, 0,
                           0, 0, 0, 0, 0, 0});
  CHECK_THROWS_WITH_AS(load_tensor(short_data, TensorFormat::RawF32),
                       doctest::Contains("data bytes"), FormatError);
}

TEST_CASE("pgm save and reload round trips exact pixel values") {
  LoadedTensor t;
  t.shape = {1, 2, 2};
  t.samples = Matrix(1, 4);
  const std::vector<std::uint8_t> pixels = {0, 10, 200, 255};
  for (std::size_t i = 0; i < 4; ++i) {
    t.samples.data[i] = 2.0 * pixels[i] / 255.0 - 1.0;
  }
  const fs::path p = temp_file("saved.pgm");
  save_tensor_pgm(p, t);
  const LoadedTensor back = load_tensor(p, TensorFormat::Pgm);
  CHECK(back.samples.data == t.samples.data);

  LoadedTensor two;
  two.shape = {2, 1, 1};
  two.samples = Matrix(2, 1);
  CHECK_THROWS_AS(save_tensor_pgm(temp_file("two.pgm"), two),
                  std::invalid_argument);
}

TEST_CASE("file-backed sources feed generate_source") {
  LoadedTensor t;
  t.shape = {1, 1, 8};
  t.samples = Matrix(1, 8);
  for (std::size_t i = 0; i < 8; ++i) t.samples.data[i] = 0.1 * (i + 1) - 0.5;
  const fs::path p = temp_file("source.tnsr");
  save_tensor_raw(p, t);

  SourceSpec spec;
  spec.kind = SourceKind::File;
  spec.path = p;
  const Matrix m = generate_source(spec);
  CHECK(m.rows == 1);
  CHECK(m.cols == 8);
}

TEST_CASE("run_compare reports consistent quality numbers") {
  SourceSpec spec;
  spec.samples = 102400;
  spec.seq_len = 1024;
  spec.seed = 3;
  CompareOptions opt;
  opt.rate_bits = 2;
  opt.num_threads = 1;
  opt.sigma = 10.0;
  const CompareResult res = run_compare(spec, opt);

  CHECK(res.tcq.quantizer == "TCQ");
  CHECK(res.sq.quantizer == "SQ");
  CHECK(res.tcq.rate_bits == 2);
  CHECK(res.tcq.mse < res.sq.mse);
  CHECK(res.gain_db() == res.tcq.snr_db - res.sq.snr_db);
  CHECK(res.tcq.header_overhead_bits == 8.0);
  CHECK(res.sq.header_overhead_bits == 0.0);

  for (const RDReport* r : {&res.tcq, &res.sq}) {
    CHECK(r->snr_db ==
          doctest::Approx(10.0 * std::log10(r->signal_power / r->mse))
              .epsilon(1e-9));
    CHECK(r->psnr_db ==
          doctest::Approx(10.0 * std::log10(4.0 / r->mse)).epsilon(1e-9));
    REQUIRE(r->entropy_bpp.has_value());
    CHECK(*r->entropy_bpp > 0.0);
    CHECK(*r->entropy_bpp < 2.5);
    CHECK(r->elapsed_ms >= 0.0);
  }
  REQUIRE(res.soft_mse.has_value());
  CHECK(*res.soft_mse > 0.0);
  CHECK(std::isfinite(*res.soft_mse));
}

TEST_CASE("rate 1 on uniform input stays within the low-rate band") {
  // The trellis-coded grid cannot beat midrise SQ at 1 bit/symbol on a
  // uniform source: each union is an offset two-point quantizer, and the
  // best table in the valid family lands about 0.2 dB short. Pin closeness
  // here; strict wins start at R=2 (previous test) and hold for all shaped
  // sources at every rate.
  SourceSpec spec;
  spec.samples = 102400;
  spec.seq_len = 1024;
  spec.seed = 3;
  CompareOptions opt;
  opt.rate_bits = 1;
  opt.num_threads = 1;
  opt.entropy.reset();
  const CompareResult uni = run_compare(spec, opt);
  CHECK(uni.tcq.mse <= 1.08 * uni.sq.mse);

  spec.kind = SourceKind::Gaussian;
  spec.scale = 0.35;
  const CompareResult gauss = run_compare(spec, opt);
  CHECK(gauss.tcq.mse < gauss.sq.mse);
}

TEST_CASE("scalar baseline matches the uniform closed form") {
  SourceSpec spec;
  spec.samples = 1 << 16;
  spec.seq_len = 1 << 12;
  spec.seed = 9;
  CompareOptions opt;
  opt.rate_bits = 4;
  opt.entropy.reset();
  const CompareResult res = run_compare(spec, opt);
  const double step = 2.0 / 16.0;
  CHECK(res.sq.mse ==
        doctest::Approx(step * step / 12.0).epsilon(0.03));
  CHECK(!res.sq.entropy_bpp.has_value());
}

TEST_CASE("run_compare validates its options") {
  SourceSpec spec;
  spec.samples = 4096;
  spec.seq_len = 1024;
  CompareOptions opt;
  opt.rate_bits = 0;
  CHECK_THROWS_AS(run_compare(spec, opt), std::invalid_argument);
  opt.rate_bits = 9;
  CHECK_THROWS_AS(run_compare(spec, opt), std::invalid_argument);
  opt.rate_bits = 2;
  opt.method = 3;
  CHECK_THROWS_AS(run_compare(spec, opt), std::invalid_argument);
}

TEST_CASE("rd sweep emits paired rows and csv round trips exactly") {
  SourceSpec spec;
  spec.samples = 1 << 16;
  spec.seq_len = 1 << 12;
  spec.seed = 4;
  SweepOptions opt;
  opt.rates = {1, 2};
  opt.num_threads = 1;
  const std::vector<RDReport> rows = run_rd_sweep(spec, opt);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].quantizer == "TCQ");
  CHECK(rows[1].quantizer == "SQ");
  CHECK(rows[0].rate_bits == 1);
  CHECK(rows[2].rate_bits == 2);
  CHECK(rows[2].snr_db > rows[0].snr_db);
  CHECK(rows[3].snr_db > rows[1].snr_db);
  // TCQ trails SQ by a bounded margin at R=1 (see the low-rate band test)
  // and must win outright from R=2 on.
  CHECK(rows[0].snr_db >= rows[1].snr_db - 0.25);
  CHECK(rows[2].snr_db >= rows[3].snr_db);

  const std::string csv = to_csv(rows);
  CHECK(csv.rfind("quantizer,R,bits_per_symbol,mse,snr_db,psnr_db,"
                  "entropy_bpp,elapsed_ms\n",
                  0) == 0);
  const std::vector<RDReport> back = parse_csv(csv);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].quantizer == rows[i].quantizer);
    CHECK(back[i].rate_bits == rows[i].rate_bits);
    CHECK(back[i].mse == rows[i].mse);
    CHECK(back[i].snr_db == rows[i].snr_db);
    CHECK(back[i].psnr_db == rows[i].psnr_db);
    CHECK(back[i].entropy_bpp == rows[i].entropy_bpp);
    CHECK(back[i].elapsed_ms == rows[i].elapsed_ms);
  }

  SweepOptions empty;
  CHECK_THROWS_AS(run_rd_sweep(spec, empty), std::invalid_argument);
}

TEST_CASE("csv handles a missing entropy column") {
  RDReport r;
  r.quantizer = "SQ";
  r.rate_bits = 3;
  r.mse = 0.001;
  r.snr_db = 25.0;
  r.psnr_db = 36.0;
  r.elapsed_ms = 1.5;
  const std::string csv = to_csv({r});
  CHECK(csv.find(",,") != std::string::npos);
  const std::vector<RDReport> back = parse_csv(csv);
  REQUIRE(back.size() == 1);
  CHECK(!back[0].entropy_bpp.has_value());
}

TEST_CASE("csv parser rejects malformed text") {
  CHECK_THROWS_AS(parse_csv("not,a,csv\n"), FormatError);
  const std::string hdr =
      "quantizer,R,bits_per_symbol,mse,snr_db,psnr_db,entropy_bpp,"
      "elapsed_ms\n";
  CHECK_THROWS_AS(parse_csv(hdr + "TCQ,2,2,0.1\n"), FormatError);
  CHECK_THROWS_AS(parse_csv(hdr + "TCQ,2,3,0.1,1,1,,1\n"), FormatError);
  CHECK_THROWS_AS(parse_csv(hdr + "TCQ,2,2,zebra,1,1,,1\n"), FormatError);
}

TEST_CASE("write_text_file reports unwritable paths") {
  CHECK_THROWS_AS(
      write_text_file("/nonexistent_tcq_dir/out.csv", "x"),
      std::invalid_argument);
  const fs::path ok = temp_file("ok.txt");
  write_text_file(ok, "hello");
  std::ifstream in(ok);
  std::string s;
  std::getline(in, s);
  CHECK(s == "hello");
}
