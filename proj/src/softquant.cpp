#include "tcq/softquant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcq {

SoftQuantConfig::SoftQuantConfig(const Codebook& cb, double sigma)
    : codebook_(&cb), sigma_(sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("sigma must be positive and finite");
  }
}

namespace {

inline double sign_of(double x) {
  if (x > 0.0) return 1.0;
  if (x < 0.0) return -1.0;
  return 0.0;  // subgradient choice at the kink
}

}  // namespace

double soft_quantize(double z, std::span<const double> points, double sigma) {
  double dmin = std::numeric_limits<double>::infinity();
  for (double c : points) dmin = std::min(dmin, std::abs(z - c));
  double num = 0.0, den = 0.0;
  for (double c : points) {
    const double w = std::exp(-sigma * (std::abs(z - c) - dmin));
    num += w * c;
    den += w;
  }
  const double lo = points.front();
  const double hi = points.back();
  return std::clamp(num / den, std::min(lo, hi), std::max(lo, hi));
}

double soft_quantize_grad(double z, std::span<const double> points,
                          double sigma) {
  double dmin = std::numeric_limits<double>::infinity();
  for (double c : points) dmin = std::min(dmin, std::abs(z - c));
  double den = 0.0;
  for (double c : points) den += std::exp(-sigma * (std::abs(z - c) - dmin));

  double mbar = 0.0;
  for (double c : points) {
    const double w = std::exp(-sigma * (std::abs(z - c) - dmin)) / den;
    mbar += w * sign_of(z - c);
  }
  double grad = 0.0;
  for (double c : points) {
    const double w = std::exp(-sigma * (std::abs(z - c) - dmin)) / den;
    grad += w * c * (mbar - sign_of(z - c));
  }
  return sigma * grad;
}

namespace {

std::vector<double> points_of(const Codebook& cb) {
  std::vector<double> pts(static_cast<std::size_t>(cb.size()));
  for (int j = 1; j <= cb.size(); ++j) {
    pts[static_cast<std::size_t>(j - 1)] = cb.point(j);
  }
  return pts;
}

}  // namespace

double soft_quantize(double z, const SoftQuantConfig& cfg) {
  return soft_quantize(z, points_of(cfg.codebook()), cfg.sigma());
}

double soft_quantize_grad(double z, const SoftQuantConfig& cfg) {
  return soft_quantize_grad(z, points_of(cfg.codebook()), cfg.sigma());
}

HardSoftResult hard_soft_pair(std::span<const double> z,
                              const SoftQuantConfig& cfg, const TrellisSpec& t,
                              BackwardMode mode) {
  const Codebook& cb = cfg.codebook();
  HardSoftResult res;
  res.hard = reconstruct(viterbi_quantize(z, cb, t), cb, t);
  res.backward_values.resize(z.size());
  res.backward_grads.resize(z.size());

  if (mode == BackwardMode::StraightThrough) {
    res.backward_values = res.hard;
    std::fill(res.backward_grads.begin(), res.backward_grads.end(), 1.0);
    return res;
  }
  const std::vector<double> pts = points_of(cb);
  for (std::size_t i = 0; i < z.size(); ++i) {
    res.backward_values[i] = soft_quantize(z[i], pts, cfg.sigma());
    res.backward_grads[i] = soft_quantize_grad(z[i], pts, cfg.sigma());
  }
  return res;
}

}  // namespace tcq
