#include "tcq/conformance.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "tcq/entropy.hpp"
#include "tcq/indexing.hpp"
#include "tcq/random.hpp"
#include "tcq/softquant.hpp"

namespace tcq {

BruteForceResult brute_force_tcq(std::span<const double> seq,
                                 const Codebook& cb, const TrellisSpec& t) {
  if (seq.empty()) {
    throw std::invalid_argument("brute_force_tcq: empty sequence");
  }
  if (seq.size() > 12) {
    throw std::invalid_argument(
        "brute_force_tcq: sequence longer than the enumeration cap of 12");
  }
  const int n = static_cast<int>(seq.size());
  BruteForceResult best;
  best.distortion = std::numeric_limits<double>::infinity();
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
  for (int s0 = 0; s0 < TrellisSpec::kNumStates; ++s0) {
    for (std::uint32_t b = 0; b < (1u << n); ++b) {
      int state = s0;
      double cost = 0.0;
      for (int i = 0; i < n; ++i) {
        const int q = static_cast<int>((b >> (n - 1 - i)) & 1u);
        const auto nr =
            cb.nearest_in_subset(seq[static_cast<std::size_t>(i)],
                                 t.branch_subset[state][q]);
        cost += nr.dist2;
        ids[static_cast<std::size_t>(i)] = nr.id;
        bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(q);
        state = t.next_state[state][q];
      }
      if (cost < best.distortion) {
        best.distortion = cost;
        best.path.initial_state = s0;
        best.path.codeword_ids = ids;
        best.path.branch_bits = bits;
        best.path.distortion = cost;
      }
    }
  }
  return best;
}

double finite_difference(const std::function<double(double)>& f, double z,
                         double h) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("finite_difference: h must be positive");
  }
  return (f(z + h) - f(z - h)) / (2.0 * h);
}

bool OracleReport::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed()) return false;
  }
  return true;
}

namespace {

std::string fmt_doubles(std::span<const double> v) {
  std::ostringstream os;
  os << std::setprecision(17) << "[";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

std::string fmt_ints(std::span<const int> v) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << "]";
  return os.str();
}

std::string fmt_path(const char* label, const QuantizedSeq& qs) {
  std::ostringstream os;
  os << label << ": distortion=" << std::setprecision(17) << qs.distortion
     << " initial_state=" << qs.initial_state
     << " ids=" << fmt_ints(qs.codeword_ids);
  return os.str();
}

double forward_cost(std::span<const double> seq, const QuantizedSeq& qs,
                    const Codebook& cb) {
  double cost = 0.0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const double e = seq[i] - cb.point(qs.codeword_ids[i]);
    cost += e * e;
  }
  return cost;
}

Codebook::NearestResult scan_nearest(const Codebook& cb, double z, int base,
                                     int stride) {
  Codebook::NearestResult best{0, std::numeric_limits<double>::infinity()};
  for (int id = base; id <= cb.size(); id += stride) {
    const double e = z - cb.point(id);
    const double d2 = e * e;
    if (d2 < best.dist2) best = {id, d2};
  }
  return best;
}

using TrialFn = std::function<bool(std::uint64_t, std::string&)>;

OracleCheck drive(const std::string& name, int trials, std::uint64_t seed,
                  const TrialFn& fn) {
  OracleCheck check;
  check.name = name;
  check.trials = trials;
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t trial_seed =
        mix_seed(seed, static_cast<std::uint64_t>(i));
    std::string detail;
    bool ok;
    try {
      ok = fn(trial_seed, detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("unexpected exception: ") + e.what();
    }
    if (!ok) {
      ++check.failures;
      if (check.counterexample.empty()) {
        std::ostringstream os;
        os << "trial " << i << " (seed 0x" << std::hex << trial_seed
           << std::dec << "): " << detail;
        check.counterexample = os.str();
      }
    }
  }
  return check;
}

// Sample value modes shared by the drivers: plain draws plus values snapped
// onto codewords or between them, where tie handling matters.
double draw_sample(std::mt19937_64& rng, const Codebook& cb, double lo,
                   double hi) {
  switch (rng() % 4) {
    case 0:
      return cb.point(1 + static_cast<int>(rng() % cb.size()));
    case 1:
      return cb.point(1 + static_cast<int>(rng() % cb.size())) +
             2.0 * cb.step();
    default:
      return uniform_range(rng, lo, hi);
  }
}

bool check_nearest(std::uint64_t seed, std::string& detail) {
  std::mt19937_64 rng(seed);
  const int rate = 1 + static_cast<int>(rng() % 6);
  const double v_min = uniform_range(rng, -2.0, -0.1);
  const double v_max = uniform_range(rng, 0.1, 2.0);
  const Codebook cb(rate, v_min, v_max);
  const double span = v_max - v_min;
  const double z = draw_sample(rng, cb, v_min - span, v_max + span);

  auto mismatch = [&](const char* what, const Codebook::NearestResult& got,
                      const Codebook::NearestResult& want) {
    std::ostringstream os;
    os << std::setprecision(17) << "R=" << rate << " bounds=[" << v_min << ","
       << v_max << "] z=" << z << " " << what << ": got id=" << got.id
       << " dist2=" << got.dist2 << ", scan id=" << want.id
       << " dist2=" << want.dist2;
    detail = os.str();
  };
  for (int d = 0; d < 4; ++d) {
    const auto got = cb.nearest_in_subset(z, static_cast<Subset>(d));
    const auto want = scan_nearest(cb, z, d + 1, 4);
    if (got.id != want.id || got.dist2 != want.dist2) {
      mismatch(to_string(static_cast<Subset>(d)).c_str(), got, want);
      return false;
    }
  }
  for (int a = 0; a < 2; ++a) {
    const auto got = cb.nearest_in_union(z, static_cast<UnionId>(a));
    const auto want = scan_nearest(cb, z, a + 1, 2);
    if (got.id != want.id || got.dist2 != want.dist2) {
      mismatch(to_string(static_cast<UnionId>(a)).c_str(), got, want);
      return false;
    }
  }
  return true;
}

bool check_viterbi(std::uint64_t seed, int seq_len, int max_rate,
                   const TrellisSpec& t, std::string& detail) {
  std::mt19937_64 rng(seed);
  const int rate = 1 + static_cast<int>(rng() % max_rate);
  const Codebook cb(rate, -1.0, 1.0);
  std::vector<double> seq(static_cast<std::size_t>(seq_len));
  for (double& z : seq) z = draw_sample(rng, cb, -1.3, 1.3);

  const QuantizedSeq vit = viterbi_quantize(seq, cb, t);
  const BruteForceResult bf = brute_force_tcq(seq, cb, t);
  const bool ok = vit.distortion == bf.distortion &&
                  is_path_consistent(vit, cb, t) &&
                  is_path_consistent(bf.path, cb, t) &&
                  forward_cost(seq, vit, cb) == vit.distortion &&
                  forward_cost(seq, bf.path, cb) == bf.distortion;
  if (!ok) {
    std::ostringstream os;
    os << "R=" << rate << " seq=" << fmt_doubles(seq) << "\n  "
       << fmt_path("viterbi", vit) << "\n  " << fmt_path("brute", bf.path);
    detail = os.str();
  }
  return ok;
}

bool check_gradient(std::uint64_t seed, std::string& detail) {
  std::mt19937_64 rng(seed);
  const int rate = 1 + static_cast<int>(rng() % 4);
  const double v_min = uniform_range(rng, -2.0, -0.1);
  const double v_max = uniform_range(rng, 0.1, 2.0);
  const Codebook cb(rate, v_min, v_max);
  std::vector<double> pts(static_cast<std::size_t>(cb.size()));
  for (int j = 1; j <= cb.size(); ++j) {
    pts[static_cast<std::size_t>(j - 1)] = cb.point(j);
  }
  const double sigma =
      std::exp(uniform_range(rng, std::log(0.25), std::log(32.0)));
  const double pad = 0.1 * (v_max - v_min);

  double z = 0.0;
  bool found = false;
  for (int attempt = 0; attempt < 200 && !found; ++attempt) {
    z = uniform_range(rng, v_min - pad, v_max + pad);
    found = true;
    for (double c : pts) {
      if (std::abs(z - c) <= 1e-4) {
        found = false;
        break;
      }
    }
  }
  if (!found) return true;  // pathological draw streak, skip

  const double analytic = soft_quantize_grad(z, pts, sigma);
  const double fd = finite_difference(
      [&](double x) { return soft_quantize(x, pts, sigma); }, z);
  const double rel = std::abs(analytic - fd) / std::max(1.0, std::abs(fd));
  if (rel >= 1e-4) {
    std::ostringstream os;
    os << std::setprecision(17) << "R=" << rate << " bounds=[" << v_min << ","
       << v_max << "] sigma=" << sigma << " z=" << z
       << " analytic=" << analytic << " central-diff=" << fd
       << " rel-err=" << rel;
    detail = os.str();
    return false;
  }
  return true;
}

bool paths_equal(const QuantizedSeq& a, const QuantizedSeq& b) {
  return a.initial_state == b.initial_state &&
         a.codeword_ids == b.codeword_ids && a.branch_bits == b.branch_bits;
}

bool check_indexing(std::uint64_t seed, const TrellisSpec& t,
                    std::string& detail) {
  std::mt19937_64 rng(seed);
  const int rate = 1 + static_cast<int>(rng() % 6);
  const Codebook cb(rate, -1.0, 1.0);
  const std::size_t n = 1 + rng() % 64;
  std::vector<double> seq(n);
  for (double& z : seq) z = draw_sample(rng, cb, -1.2, 1.2);
  const QuantizedSeq qs = viterbi_quantize(seq, cb, t);

  const Bitstream bs1 = parse_bitstream(encode_method1(qs, cb, t).to_bytes());
  const QuantizedSeq d1 = decode_method1(bs1, cb, t);
  const Bitstream bs2 = parse_bitstream(encode_method2(qs, cb, t).to_bytes());
  const QuantizedSeq d2 = decode_method2(bs2, cb, t);
  if (!paths_equal(qs, d1) || !paths_equal(qs, d2)) {
    std::ostringstream os;
    os << "R=" << rate << " seq=" << fmt_doubles(seq) << "\n  "
       << fmt_path("encoded", qs) << "\n  " << fmt_path("method1", d1)
       << "\n  " << fmt_path("method2", d2);
    detail = os.str();
    return false;
  }
  if (reconstruct(d1, cb, t) != reconstruct(d2, cb, t)) {
    detail = "method I and II reconstructions differ";
    return false;
  }
  return true;
}

bool check_entropy(std::uint64_t seed, const TrellisSpec& t,
                   std::string& detail) {
  std::mt19937_64 rng(seed);
  const int rate = 1 + static_cast<int>(rng() % 4);
  const Codebook cb(rate, -1.0, 1.0);
  const TensorShape shape{1 + static_cast<std::uint32_t>(rng() % 3),
                          1 + static_cast<std::uint32_t>(rng() % 6),
                          1 + static_cast<std::uint32_t>(rng() % 6)};
  std::vector<double> seq(shape.num_symbols());
  for (double& z : seq) z = draw_sample(rng, cb, -1.2, 1.2);
  const QuantizedSeq qs = viterbi_quantize(seq, cb, t);
  const ModelKind kind = static_cast<ModelKind>(rng() % 3);

  const EntropyContainer ec = entropy_encode_seq(qs, cb, t, shape, kind);
  const EntropyContainer ec2 = EntropyContainer::parse(ec.to_bytes());
  const QuantizedSeq back = entropy_decode_seq(ec2, cb, t);
  if (!paths_equal(qs, back)) {
    std::ostringstream os;
    os << "R=" << rate << " shape=" << shape.c << "x" << shape.h << "x"
       << shape.w << " model=" << to_string(kind) << "\n  "
       << fmt_path("encoded", qs) << "\n  " << fmt_path("decoded", back);
    detail = os.str();
    return false;
  }
  return true;
}

}  // namespace

OracleReport run_oracle_suite(const OracleConfig& cfg) {
  if (cfg.max_sequence_len < 1 || cfg.max_sequence_len > 12) {
    throw std::invalid_argument("max_sequence_len must be in [1, 12]");
  }
  if (cfg.max_rate < 1 || cfg.max_rate > 3) {
    throw std::invalid_argument("max_rate must be in [1, 3]");
  }
  if (cfg.trials < 1) {
    throw std::invalid_argument("trials must be positive");
  }
  const TrellisSpec t = default_trellis4();

  OracleReport report;
  report.checks.push_back(
      drive("nearest-linear-scan", cfg.trials, cfg.seed, check_nearest));
  report.checks.push_back(drive(
      "viterbi-brute-force", cfg.trials, cfg.seed + 1,
      [&](std::uint64_t s, std::string& d) {
        return check_viterbi(s, cfg.max_sequence_len, cfg.max_rate, t, d);
      }));
  report.checks.push_back(
      drive("gradient-central-diff", cfg.trials, cfg.seed + 2, check_gradient));
  report.checks.push_back(drive("indexing-round-trip", cfg.trials, cfg.seed + 3,
                                [&](std::uint64_t s, std::string& d) {
                                  return check_indexing(s, t, d);
                                }));
  report.checks.push_back(drive("entropy-round-trip", cfg.trials, cfg.seed + 4,
                                [&](std::uint64_t s, std::string& d) {
                                  return check_entropy(s, t, d);
                                }));
  return report;
}

}  // namespace tcq
