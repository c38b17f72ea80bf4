#pragma once

// Exact transition probabilities and finite-ensemble projective sampling.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pstomo/basis.hpp"
#include "pstomo/state.hpp"

namespace pstomo {

struct ProbabilityVector {
    std::string basis_id;
    std::vector<double> p;
};

struct CountRecord {
    std::string basis_id;
    std::vector<std::int64_t> counts;
    std::int64_t shots = 0;  // invariant: shots == sum(counts) >= 1
};

// Entry j = |<basis_j|psi>|^2.
ProbabilityVector exact_probs(const PureState& psi, const OrthonormalBasis& basis);

// Multinomial draw of `shots` outcomes; deterministic per seed (one
// cumulative-table inverse draw per shot from Rng(seed)).
CountRecord sample_counts(const ProbabilityVector& probs, std::int64_t shots, std::uint64_t seed);

ProbabilityVector to_frequencies(const CountRecord& record);

// One simulated acquisition run: N shots on each basis (total budget 3N).
// Record r is sampled with seed derive_seed(seed, {r}).
std::array<CountRecord, 3> simulate_counts_3bb(const PureState& truth, const ThreeBasisSet& bases,
                                               std::int64_t shots_per_basis, std::uint64_t seed);

// Baseline acquisition over B0..B4 (total budget 5N), same seed scheme.
std::array<CountRecord, 5> simulate_counts_5bb(const PureState& truth, const PairBasisParams& params,
                                               std::int64_t shots_per_basis, std::uint64_t seed);

std::array<ProbabilityVector, 3> exact_probs_3bb(const PureState& truth, const ThreeBasisSet& bases);

std::array<ProbabilityVector, 5> exact_probs_5bb(const PureState& truth, const PairBasisParams& params);

}  // namespace pstomo
