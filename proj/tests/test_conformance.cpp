#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "tcq/conformance.hpp"
#include "tcq/random.hpp"

using namespace tcq;

TEST_CASE("brute force finds zero distortion on codeword inputs") {
  const Codebook cb(2, -1.0, 1.0);
  const TrellisSpec t = default_trellis4();
  std::mt19937_64 rng(21);

  QuantizedSeq qs;
  qs.initial_state = 3;
  int state = qs.initial_state;
  for (int i = 0; i < 6; ++i) {
    const int q = static_cast<int>(rng() % 2);
    qs.branch_bits.push_back(static_cast<std::uint8_t>(q));
    qs.codeword_ids.push_back(cb.id_from_subset_rank(
        t.branch_subset[state][q], static_cast<int>(rng() % 2)));
    state = t.next_state[state][q];
  }
  const std::vector<double> values = reconstruct(qs, cb, t);

  const BruteForceResult bf = brute_force_tcq(values, cb, t);
  CHECK(bf.distortion == 0.0);
  CHECK(reconstruct(bf.path, cb, t) == values);
}

TEST_CASE("brute force single symbol scans all eight branches") {
  const Codebook cb(2, -1.0, 1.0);
  const TrellisSpec t = default_trellis4();
  const std::vector<double> z = {0.0};
  const BruteForceResult bf = brute_force_tcq(z, cb, t);
  CHECK(bf.distortion == 0.015625);
  CHECK(bf.path.initial_state == 0);
  REQUIRE(bf.path.codeword_ids.size() == 1);
  CHECK(bf.path.codeword_ids[0] == 5);
}

TEST_CASE("brute force agrees with the trellis search") {
  const TrellisSpec t = default_trellis4();
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const Codebook cb(1 + static_cast<int>(rng() % 2), -1.0, 1.0);
    std::vector<double> z(1 + rng() % 6);
    for (double& x : z) x = uniform_range(rng, -1.2, 1.2);
    const BruteForceResult bf = brute_force_tcq(z, cb, t);
    const QuantizedSeq vit = viterbi_quantize(z, cb, t);
    REQUIRE(bf.distortion == vit.distortion);
  }
}

TEST_CASE("brute force guards its input size") {
  const Codebook cb(1, -1.0, 1.0);
  const TrellisSpec t = default_trellis4();
  CHECK_THROWS_AS(brute_force_tcq(std::vector<double>{}, cb, t),
                  std::invalid_argument);
  CHECK_THROWS_AS(brute_force_tcq(std::vector<double>(13, 0.0), cb, t),
                  std::invalid_argument);
}

TEST_CASE("central differences hit easy closed forms") {
  CHECK(finite_difference([](double x) { return x; }, 0.3) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(finite_difference([](double) { return 4.0; }, 0.3) ==
        doctest::Approx(0.0).epsilon(1e-9));
  CHECK(finite_difference([](double x) { return std::sin(x); }, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(finite_difference([](double x) { return x; }, 0.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("oracle suite passes on a reduced budget") {
  OracleConfig cfg;
  cfg.max_sequence_len = 5;
  cfg.max_rate = 2;
  cfg.trials = 30;
  cfg.seed = 7;
  const OracleReport report = run_oracle_suite(cfg);
  REQUIRE(report.checks.size() == 5);
  for (const OracleCheck& c : report.checks) {
    INFO(c.name, ": ", c.counterexample);
    CHECK(c.trials == 30);
    CHECK(c.failures == 0);
    CHECK(c.passed());
  }
  CHECK(report.all_passed());
}

TEST_CASE("oracle suite validates its configuration") {
  OracleConfig cfg;
  cfg.trials = 0;
  CHECK_THROWS_AS(run_oracle_suite(cfg), std::invalid_argument);
  cfg = OracleConfig{};
  cfg.max_sequence_len = 13;
  CHECK_THROWS_AS(run_oracle_suite(cfg), std::invalid_argument);
  cfg = OracleConfig{};
  cfg.max_rate = 4;
  CHECK_THROWS_AS(run_oracle_suite(cfg), std::invalid_argument);
}

TEST_CASE("failing checks flip the report verdict") {
  OracleReport report;
  report.checks.push_back({"synthetic", 10, 0, ""});
  CHECK(report.all_passed());
  report.checks.push_back({"synthetic-bad", 10, 3, "trial 0: oops"});
  CHECK(!report.all_passed());
}
