#pragma once

#include <span>
#include <vector>

#include "tcq/codebook.hpp"
#include "tcq/trellis.hpp"

namespace tcq {

// Softness parameter plus the codebook it applies to. The caller keeps the
// codebook alive for the config's lifetime.
class SoftQuantConfig {
 public:
  // Throws std::invalid_argument unless sigma > 0 and finite.
  SoftQuantConfig(const Codebook& cb, double sigma);

  const Codebook& codebook() const { return *codebook_; }
  double sigma() const { return sigma_; }

 private:
  const Codebook* codebook_;
  double sigma_;
};

// Softmax-weighted average of the points with weights exp(-sigma*|z - c_j|),
// evaluated with max-subtraction in the exponent so large sigma cannot
// overflow. The result is clamped to [min point, max point].
double soft_quantize(double z, std::span<const double> points, double sigma);

// Analytic derivative of soft_quantize:
//   d/dz = sigma * sum_j w_j * c_j * (mbar - m_j),
// with m_j = sign(z - c_j) and mbar the weight-averaged sign. At a point
// z == c_j the kink's subgradient is fixed by sign(0) = 0.
double soft_quantize_grad(double z, std::span<const double> points,
                          double sigma);

double soft_quantize(double z, const SoftQuantConfig& cfg);
double soft_quantize_grad(double z, const SoftQuantConfig& cfg);

enum class BackwardMode {
  Soft,             // backward surrogate = soft quantization + its derivative
  StraightThrough,  // backward surrogate = hard values, all gradients 1
};

// The hard-forward / soft-backward contract a training wrapper needs:
// hard is the trellis reconstruction of z, backward_values/backward_grads the
// per-element surrogate used in the backward pass.
struct HardSoftResult {
  std::vector<double> hard;
  std::vector<double> backward_values;
  std::vector<double> backward_grads;
};

HardSoftResult hard_soft_pair(std::span<const double> z,
                              const SoftQuantConfig& cfg, const TrellisSpec& t,
                              BackwardMode mode = BackwardMode::Soft);

}  // namespace tcq
