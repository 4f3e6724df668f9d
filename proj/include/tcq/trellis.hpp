#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tcq/codebook.hpp"
#include "tcq/matrix.hpp"

namespace tcq {

// 4-state trellis. From state s with branch bit q the encoder quantizes the
// current symbol with sub-quantizer branch_subset[s][q] and moves to
// next_state[s][q] = (2s + q) mod 4 (shift register).
//
// Decodability invariants (checked by validate):
//   - the two branch subsets of a state are distinct and both belong to
//     state_union[s], so every codeword of the union pins down the branch;
//   - every state has exactly two incoming branches.
struct TrellisSpec {
  static constexpr int kNumStates = 4;

  int num_states = kNumStates;
  std::array<std::array<int, 2>, 4> next_state{};
  std::array<std::array<Subset, 2>, 4> branch_subset{};
  std::array<UnionId, 4> state_union{};
};

// The fixed table used throughout: states 0,2 draw from A0, states 1,3 from
// A1; branch subsets {D0,D2}, {D3,D1}, {D2,D0}, {D1,D3}, i.e.
// branch_subset[s][q] = D_((2q - s) mod 4).
TrellisSpec default_trellis4();

// Returns every invariant violation (empty means valid).
std::vector<std::string> validate(const TrellisSpec& t);
bool is_valid(const TrellisSpec& t);

// Output of the trellis search for one sequence. codeword_ids are 1-based
// global codebook ids; replaying branch_bits from initial_state must land on
// states whose branch subset matches each codeword's subset.
// distortion is the realized squared-error sum against the encoder input;
// it is not carried by bitstreams (decoders leave it 0).
struct QuantizedSeq {
  int initial_state = 0;
  std::vector<int> codeword_ids;
  std::vector<std::uint8_t> branch_bits;
  double distortion = 0.0;

  std::size_t size() const { return codeword_ids.size(); }
};

// Minimum-distortion path over all four initial states and all branch
// sequences, by dynamic programming: per symbol each state keeps only its
// cheapest incoming branch. Survivor ties prefer q=0 then the smaller source
// state; final-state ties prefer the smaller state id.
// Throws std::invalid_argument on an empty sequence.
QuantizedSeq viterbi_quantize(std::span<const double> seq, const Codebook& cb,
                              const TrellisSpec& t);

// Quantizes every row of the matrix independently. Results are bit-identical
// to viterbi_quantize row by row; rows may be fanned out to worker threads
// (num_threads = 0 picks hardware concurrency) with order-preserving
// collection. Throws std::invalid_argument on an empty matrix.
std::vector<QuantizedSeq> quantize_batch(const Matrix& rows, const Codebook& cb,
                                         const TrellisSpec& t,
                                         int num_threads = 0);

bool is_path_consistent(const QuantizedSeq& qs, const Codebook& cb,
                        const TrellisSpec& t);

// value[t] = c_{codeword_ids[t]}. Throws std::invalid_argument if the path is
// not consistent with the trellis.
std::vector<double> reconstruct(const QuantizedSeq& qs, const Codebook& cb,
                                const TrellisSpec& t);

}  // namespace tcq
