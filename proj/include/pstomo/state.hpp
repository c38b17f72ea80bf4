#pragma once

// Pure-state representation and the canonical-outcome pattern analysis that
// drives support detection and degeneracy checks.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace pstomo {

using cx = std::complex<double>;

// Normalized amplitude vector with the global phase fixed: the first
// amplitude with modulus above 1e-12 is real and nonnegative.
struct PureState {
    std::vector<cx> amps;

    int dim() const { return static_cast<int>(amps.size()); }
    const cx& operator[](int k) const { return amps[static_cast<std::size_t>(k)]; }
};

// Support pattern of a canonical-basis probability vector. Arcs are the
// maximal runs of non-vanishing indices, contiguous modulo d; a pattern
// with two or more arcs cannot be estimated without adapted bases.
struct ZeroPattern {
    int dim = 0;
    std::vector<int> zero_indices;
    std::vector<std::vector<int>> arcs;  // each arc in cyclic walking order

    bool ambiguous() const { return arcs.size() >= 2; }
};

// Normalizes and gauge-fixes. Inputs differing only by scale and global
// phase map to the same state. Throws ZeroVector if all moduli < 1e-12.
PureState make_state(std::vector<cx> amplitudes);

// State drawn from the unitarily invariant measure, d even and >= 4.
// Deterministic per seed: d complex normals from Rng(seed), then make_state.
PureState haar_random(int d, std::uint64_t seed);

// 1 - |<phi|psi>|^2, clamped to [0, 1].
double infidelity(const PureState& psi, const PureState& phi);

cx inner_product(const PureState& bra, const PureState& ket);

// Pair correlators L_k = 2 c_k conj(c_{k+1 mod d}) for k = 0..d-1.
// Re(L_k) is what the pair-plus projectors measure; the sign of Im(L_k)
// is what candidate enumeration has to guess.
std::vector<cx> pair_correlators(const PureState& psi);

ZeroPattern classify_support(std::span<const double> canonical_freqs, double eps);

// True iff at least two disjoint index pairs have frequencies equal
// within eps. Degeneracy proxy that triggers basis re-randomization.
bool detect_equal_pairs(std::span<const double> canonical_freqs, double eps);

}  // namespace pstomo
