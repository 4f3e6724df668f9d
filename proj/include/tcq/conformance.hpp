#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tcq/codebook.hpp"
#include "tcq/trellis.hpp"

namespace tcq {

// Budget for the randomized agreement drivers. max_sequence_len and max_rate
// bound the exhaustive checks (the trellis oracle enumerates 4 * 2^N branch
// sequences per trial); the round-trip and gradient drivers pick their own
// sizes. run_oracle_suite rejects configs outside the caps.
struct OracleConfig {
  int max_sequence_len = 8;  // <= 12
  int max_rate = 2;          // <= 3
  int trials = 500;
  std::uint64_t seed = 1;
};

struct BruteForceResult {
  double distortion = 0.0;
  QuantizedSeq path;
};

// Reference trellis search: every initial state and branch sequence is tried,
// each branch quantized with its subset's nearest codeword, and the first
// path attaining the minimum kept. Distortion accumulates in symbol order,
// term for term the same sums the dynamic program forms, so agreement with
// viterbi_quantize is exact equality, not a tolerance.
// Throws std::invalid_argument when seq is empty or longer than 12.
BruteForceResult brute_force_tcq(std::span<const double> seq,
                                 const Codebook& cb, const TrellisSpec& t);

// Central difference (f(z+h) - f(z-h)) / (2h).
// Throws std::invalid_argument unless h > 0.
double finite_difference(const std::function<double(double)>& f, double z,
                         double h = 1e-6);

struct OracleCheck {
  std::string name;
  int trials = 0;
  int failures = 0;
  std::string counterexample;  // first failing instance, for reproduction
  bool passed() const { return failures == 0; }
};

struct OracleReport {
  std::vector<OracleCheck> checks;
  bool all_passed() const;
};

// Runs the agreement drivers, cfg.trials instances each:
//   nearest-linear-scan    constant-time nearest vs a full scan of the points
//   viterbi-brute-force    DP distortion vs exhaustive search (exact match)
//   gradient-central-diff  analytic derivative vs finite differences
//   indexing-round-trip    method I/II serialize-parse-decode identity
//   entropy-round-trip     entropy container encode-decode identity
// Each trial reseeds from (cfg.seed, trial index), so a failure reproduces
// in isolation from the seed printed in the counterexample.
OracleReport run_oracle_suite(const OracleConfig& cfg);

}  // namespace tcq
