#include "tcq/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tcq {

UnionId union_of_subset(Subset d) {
  return (d == Subset::D0 || d == Subset::D2) ? UnionId::A0 : UnionId::A1;
}

std::string to_string(Subset d) {
  static const char* names[] = {"D0", "D1", "D2", "D3"};
  return names[static_cast<int>(d)];
}

std::string to_string(UnionId a) {
  return a == UnionId::A0 ? "A0" : "A1";
}

namespace {

void check_bounds(int rate_bits, double v_min, double v_max) {
  if (rate_bits < 1) {
    throw std::invalid_argument("rate_bits must be >= 1");
  }
  if (rate_bits > 16) {
    throw std::invalid_argument("rate_bits must be <= 16");
  }
  if (!std::isfinite(v_min) || !std::isfinite(v_max)) {
    throw std::invalid_argument("signal bounds must be finite");
  }
  if (!(v_min < v_max)) {
    throw std::invalid_argument("v_min must be strictly less than v_max");
  }
}

}  // namespace

Codebook::Codebook(int rate_bits, double v_min, double v_max)
    : rate_bits_(rate_bits), v_min_(v_min), v_max_(v_max) {
  check_bounds(rate_bits, v_min, v_max);
  const int num_points = 1 << (rate_bits + 1);
  step_ = (v_max - v_min) / num_points;
  points_.resize(static_cast<std::size_t>(num_points));
  for (int j = 1; j <= num_points; ++j) {
    points_[static_cast<std::size_t>(j - 1)] = v_min + step_ / 2 + (j - 1) * step_;
  }
}

Codebook::NearestResult Codebook::nearest_on_grid(double z, int base_id,
                                                  int id_stride,
                                                  int count) const {
  // Grid members are point(base_id + k*id_stride) for k = 0..count-1 with
  // uniform spacing id_stride*step. Bracket z between two grid positions and
  // compare against the stored points so distances match a linear scan.
  const double spacing = id_stride * step_;
  const double u = (z - point(base_id)) / spacing;
  long k = static_cast<long>(std::floor(u));
  const long max_k = count - 1;
  const long k0 = std::clamp(k, 0L, max_k);
  const long k1 = std::clamp(k + 1, 0L, max_k);
  const int id0 = base_id + static_cast<int>(k0) * id_stride;
  const int id1 = base_id + static_cast<int>(k1) * id_stride;
  const double e0 = z - point(id0);
  const double e1 = z - point(id1);
  const double d0 = e0 * e0;
  const double d1 = e1 * e1;
  if (d0 <= d1) return {id0, d0};  // tie -> smaller id
  return {id1, d1};
}

Codebook::NearestResult Codebook::nearest_in_subset(double z, Subset d) const {
  return nearest_on_grid(z, static_cast<int>(d) + 1, 4, subset_size());
}

Codebook::NearestResult Codebook::nearest_in_union(double z, UnionId a) const {
  return nearest_on_grid(z, static_cast<int>(a) + 1, 2, union_size());
}

ScalarQuantizer::ScalarQuantizer(int rate_bits, double v_min, double v_max)
    : rate_bits_(rate_bits), v_min_(v_min), v_max_(v_max) {
  check_bounds(rate_bits, v_min, v_max);
  const int num_levels = 1 << rate_bits;
  step_ = (v_max - v_min) / num_levels;
  levels_.resize(static_cast<std::size_t>(num_levels));
  for (int k = 1; k <= num_levels; ++k) {
    levels_[static_cast<std::size_t>(k - 1)] = v_min + step_ / 2 + (k - 1) * step_;
  }
}

ScalarQuantizer::Result ScalarQuantizer::quantize(double z) const {
  const double u = (z - levels_[0]) / step_;
  long k = static_cast<long>(std::floor(u));
  const long max_k = num_levels() - 1;
  const long k0 = std::clamp(k, 0L, max_k);
  const long k1 = std::clamp(k + 1, 0L, max_k);
  const double e0 = z - levels_[static_cast<std::size_t>(k0)];
  const double e1 = z - levels_[static_cast<std::size_t>(k1)];
  if (e0 * e0 <= e1 * e1) {
    return {static_cast<int>(k0) + 1, levels_[static_cast<std::size_t>(k0)]};
  }
  return {static_cast<int>(k1) + 1, levels_[static_cast<std::size_t>(k1)]};
}

}  // namespace tcq
