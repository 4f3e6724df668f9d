#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tcq {

// The four sub-quantizer labels. Codewords are assigned cyclically from the
// left: c_1 -> D0, c_2 -> D1, c_3 -> D2, c_4 -> D3, c_5 -> D0, ...
enum class Subset : std::uint8_t { D0 = 0, D1 = 1, D2 = 2, D3 = 3 };

// Union quantizers: A0 = D0 u D2 (odd codeword ids), A1 = D1 u D3 (even).
// Each union is itself a uniform grid with spacing 2*step.
enum class UnionId : std::uint8_t { A0 = 0, A1 = 1 };

UnionId union_of_subset(Subset d);
std::string to_string(Subset d);
std::string to_string(UnionId a);

// Uniform codebook with 2^(R+1) reconstruction points over [v_min, v_max]:
//   step  = (v_max - v_min) / 2^(R+1)
//   c_j   = v_min + step/2 + (j-1)*step,   j = 1 .. 2^(R+1)
// Codeword ids are 1-based throughout, matching the c_j convention.
// Immutable after construction; all queries are pure and thread-safe.
class Codebook {
 public:
  // Throws std::invalid_argument unless 1 <= rate_bits <= 16 and
  // v_min < v_max with both finite.
  Codebook(int rate_bits, double v_min, double v_max);

  int rate_bits() const { return rate_bits_; }
  double v_min() const { return v_min_; }
  double v_max() const { return v_max_; }
  double step() const { return step_; }

  int size() const { return static_cast<int>(points_.size()); }  // L = 2^(R+1)
  int subset_size() const { return size() / 4; }                 // 2^(R-1)
  int union_size() const { return size() / 2; }                  // 2^R

  // Reconstruction point for a 1-based codeword id.
  double point(int id) const { return points_[static_cast<std::size_t>(id - 1)]; }

  Subset subset_of(int id) const { return static_cast<Subset>((id - 1) % 4); }
  UnionId union_of(int id) const { return static_cast<UnionId>((id - 1) % 2); }

  // 0-based rank of a codeword within its subset / union, ascending by value.
  int rank_in_subset(int id) const { return (id - 1) / 4; }
  int rank_in_union(int id) const { return (id - 1) / 2; }
  int id_from_subset_rank(Subset d, int rank) const {
    return static_cast<int>(d) + 1 + 4 * rank;
  }
  int id_from_union_rank(UnionId a, int rank) const {
    return static_cast<int>(a) + 1 + 2 * rank;
  }

  struct NearestResult {
    int id;        // 1-based global codeword id
    double dist2;  // squared error |z - c_id|^2
  };

  // Nearest codeword of the given subset (4*step grid) or union (2*step
  // grid). Constant time: the grid position is computed arithmetically and
  // clamped to the subset's extremes. Ties break toward the smaller id.
  NearestResult nearest_in_subset(double z, Subset d) const;
  NearestResult nearest_in_union(double z, UnionId a) const;

 private:
  NearestResult nearest_on_grid(double z, int base_id, int id_stride,
                                int count) const;

  int rate_bits_;
  double v_min_, v_max_, step_;
  std::vector<double> points_;
};

// Midrise uniform scalar quantizer with 2^R levels over [v_min, v_max]:
//   step    = (v_max - v_min) / 2^R
//   level_k = v_min + step/2 + (k-1)*step,   k = 1 .. 2^R
// The matched-rate baseline for TCQ comparisons.
class ScalarQuantizer {
 public:
  ScalarQuantizer(int rate_bits, double v_min, double v_max);

  int rate_bits() const { return rate_bits_; }
  double v_min() const { return v_min_; }
  double v_max() const { return v_max_; }
  double step() const { return step_; }
  int num_levels() const { return static_cast<int>(levels_.size()); }
  double level(int k) const { return levels_[static_cast<std::size_t>(k - 1)]; }

  struct Result {
    int index;     // 1-based level index in [1, 2^R]
    double value;  // reconstruction level
  };

  // Nearest level, out-of-range inputs clamp to the extreme levels,
  // ties toward the smaller index.
  Result quantize(double z) const;

 private:
  int rate_bits_;
  double v_min_, v_max_, step_;
  std::vector<double> levels_;
};

}  // namespace tcq
