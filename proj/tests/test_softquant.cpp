#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "tcq/conformance.hpp"
#include "tcq/random.hpp"
#include "tcq/softquant.hpp"

using namespace tcq;

TEST_CASE("two-point closed forms") {
  const std::vector<double> pts{-0.5, 0.5};
  CHECK(soft_quantize(0.0, pts, 3.0) == 0.0);

  const double e = std::exp(-20.0);
  const double want = 0.5 * (1.0 - e) / (1.0 + e);
  CHECK(soft_quantize(0.5, pts, 20.0) == doctest::Approx(want).epsilon(1e-8));

  CHECK(soft_quantize_grad(0.0, pts, 1.0) == 0.5);
}

TEST_CASE("large sigma recovers the nearest codeword") {
  const Codebook cb(1, -1.0, 1.0);
  const SoftQuantConfig cfg(cb, 1e4);
  for (double z : {-0.9, -0.4, 0.1, 0.3, 0.72}) {
    const double nearest =
        cb.point(cb.nearest_in_union(z, UnionId::A0).dist2 <
                         cb.nearest_in_union(z, UnionId::A1).dist2
                     ? cb.nearest_in_union(z, UnionId::A0).id
                     : cb.nearest_in_union(z, UnionId::A1).id);
    CHECK(soft_quantize(z, cfg) == doctest::Approx(nearest).epsilon(1e-6));
  }
}

TEST_CASE("saturated softmax has vanishing gradient") {
  const Codebook cb(1, -1.0, 1.0);
  const SoftQuantConfig cfg(cb, 100.0);
  CHECK(std::abs(soft_quantize_grad(50.0, cfg)) < 1e-9);
  CHECK(std::abs(soft_quantize_grad(-50.0, cfg)) < 1e-9);
}

TEST_CASE("range, symmetry and monotonicity") {
  const Codebook cb(2, -1.0, 1.0);
  const SoftQuantConfig cfg(cb, 7.0);
  std::mt19937_64 rng(41);
  for (int i = 0; i < 2000; ++i) {
    const double z = uniform_range(rng, -3.0, 3.0);
    const double v = soft_quantize(z, cfg);
    CHECK(v >= cb.point(1));
    CHECK(v <= cb.point(cb.size()));
    CHECK(std::abs(soft_quantize(-z, cfg) + v) < 1e-12);
  }
  const std::vector<double> pts{-0.4, 0.4};
  double prev = soft_quantize(-1.0, pts, 9.0);
  for (double z = -1.0; z <= 1.0; z += 1e-3) {
    const double v = soft_quantize(z, pts, 9.0);
    CHECK(v + 1e-15 >= prev);
    prev = v;
  }
}

TEST_CASE("no overflow at extreme sigma") {
  const std::vector<double> pts{-0.5, 0.5};
  const double v = soft_quantize(0.49, pts, 1e8);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::isfinite(soft_quantize_grad(0.49, pts, 1e8)));
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 2000; ++trial) {
    const Codebook cb(1 + static_cast<int>(rng() % 3), -1.0, 1.0);
    std::vector<double> pts(static_cast<std::size_t>(cb.size()));
    for (int j = 1; j <= cb.size(); ++j) pts[j - 1] = cb.point(j);
    const double sigma = uniform_range(rng, 0.5, 50.0);
    const double z = uniform_range(rng, -1.25, 1.25);
    bool near_kink = false;
    for (double c : pts) near_kink |= std::abs(z - c) <= 1e-4;
    if (near_kink) continue;

    const double analytic = soft_quantize_grad(z, pts, sigma);
    const double fd = finite_difference(
        [&](double x) { return soft_quantize(x, pts, sigma); }, z);
    CHECK(std::abs(analytic - fd) / std::max(1.0, std::abs(fd)) < 1e-4);
  }
}

TEST_CASE("hard_soft_pair wires the two passes together") {
  const Codebook cb(2, -1.0, 1.0);
  const TrellisSpec t = default_trellis4();
  const SoftQuantConfig cfg(cb, 40.0);
  std::mt19937_64 rng(43);
  std::vector<double> z(64);
  for (double& x : z) x = uniform_range(rng, -1.0, 1.0);

  const HardSoftResult soft = hard_soft_pair(z, cfg, t);
  CHECK(soft.hard == reconstruct(viterbi_quantize(z, cb, t), cb, t));
  CHECK(soft.backward_values.size() == z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(soft.backward_values[i] == soft_quantize(z[i], cfg));
    CHECK(soft.backward_grads[i] == soft_quantize_grad(z[i], cfg));
  }

  const HardSoftResult st =
      hard_soft_pair(z, cfg, t, BackwardMode::StraightThrough);
  CHECK(st.hard == soft.hard);
  CHECK(st.backward_values == st.hard);
  CHECK(st.backward_grads == std::vector<double>(z.size(), 1.0));
}

TEST_CASE("codeword inputs are soft fixed points at large sigma") {
  const Codebook cb(2, -1.0, 1.0);
  const TrellisSpec t = default_trellis4();
  const SoftQuantConfig cfg(cb, 1e4);
  // Wander the trellis so the input is a reachable codeword sequence; the
  // hard pass then returns it unchanged and the soft pass must agree.
  QuantizedSeq path;
  path.initial_state = 0;
  int state = path.initial_state;
  std::mt19937_64 rng(61);
  for (int i = 0; i < 12; ++i) {
    const int q = static_cast<int>(rng() % 2);
    const int rank = static_cast<int>(rng() % cb.subset_size());
    path.branch_bits.push_back(static_cast<std::uint8_t>(q));
    path.codeword_ids.push_back(
        cb.id_from_subset_rank(t.branch_subset[state][q], rank));
    state = t.next_state[state][q];
  }
  const std::vector<double> z = reconstruct(path, cb, t);
  const HardSoftResult res = hard_soft_pair(z, cfg, t);
  CHECK(res.hard == z);
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(res.backward_values[i] ==
          doctest::Approx(res.hard[i]).epsilon(1e-6));
  }
}

TEST_CASE("config rejects bad sigma") {
  const Codebook cb(1, -1.0, 1.0);
  CHECK_THROWS_AS(SoftQuantConfig(cb, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(SoftQuantConfig(cb, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(SoftQuantConfig(cb, std::nan("")), std::invalid_argument);
}
