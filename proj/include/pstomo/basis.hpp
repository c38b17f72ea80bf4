#pragma once

// Measurement basis constructions: canonical, the four pair bases of the
// five-basis method, the two completed pair bases of the three-basis
// method, randomized replacements, and support-restricted adaptations.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pstomo/state.hpp"

namespace pstomo {

enum class VectorRole { Canonical, PairPlus, PairMinus, Completion };

struct OrthonormalBasis {
    std::string id;
    int dim = 0;  // ambient dimension of the vectors
    std::vector<std::vector<cx>> vectors;
    std::vector<VectorRole> roles;

    int size() const { return static_cast<int>(vectors.size()); }
};

// a|2v> + b|2v+1> pair amplitudes plus the completion phases.
struct PairBasisParams {
    double a = 0.0;
    double b = 0.0;
    std::vector<double> phases;  // d/2 angles, radians
};

struct ThreeBasisSet {
    OrthonormalBasis canonical;  // B0
    OrthonormalBasis b1p;        // pair-plus on (2v, 2v+1) + completions
    OrthonormalBasis b3p;        // pair-plus on (2v+1, 2v+2 mod d) + completions
    PairBasisParams params;
    bool randomized = false;

    int dim() const { return canonical.dim; }
};

// Three-basis set built on a contiguous sub-run of the canonical indices,
// with the mapping back to the ambient index labels.
struct AdaptedBases {
    ThreeBasisSet bases;       // dimension = support.size()
    std::vector<int> support;  // local index -> ambient index
    int ambient_dim = 0;

    OrthonormalBasis embed(const OrthonormalBasis& local) const;
    PureState embed_state(const PureState& local) const;
};

// a = b = 1/sqrt(2), completion phases pi*n(n+1)/d. The phase chirp breaks
// the conjugation symmetry so that +Im and -Im candidates are
// distinguishable; any such choice works and it is configurable.
PairBasisParams default_params(int d);

OrthonormalBasis canonical(int d);

// B1..B4: pairs (2v, 2v+1) and (2v+1, 2v+2 mod d), each with +/- and +/-i
// partners. Reduces to the familiar 1/sqrt(2) construction at a = b.
std::array<OrthonormalBasis, 4> five_bases(int d, const PairBasisParams& params);

// The d/2 completion vectors sum_n F_jn (b|2n+shift> - a|2n+1+shift mod d>)
// with F_jn = sqrt(2/d) exp(i [2 pi j n / (d/2) + phases_n]). They are
// orthonormal and orthogonal to every pair-plus vector of the same shift.
std::vector<std::vector<cx>> fourier_completion(int d, int shift, std::span<const double> phases,
                                                double a = 0.70710678118654752440,
                                                double b = 0.70710678118654752440);

ThreeBasisSet three_bases(int d, const PairBasisParams& params);

// a drawn uniformly in [0.3, 0.95]; completion slots filled with random
// complex vectors projected onto the complement of the pair-plus vectors
// and orthonormalized. Retries internally, then throws DegenerateDraw.
ThreeBasisSet random_three_bases(int d, std::uint64_t seed);

// Modified Gram-Schmidt with one reorthogonalization pass. Keeps the
// direction of the first vector. Throws LinearlyDependent below 1e-10.
std::vector<std::vector<cx>> gram_schmidt(std::vector<std::vector<cx>> vectors);

// Bases for a state confined to `arc` (cyclically contiguous ambient
// indices). Odd-length arcs are padded with the next cyclic index.
AdaptedBases adapt_to_support(const std::vector<int>& arc, int ambient_dim, std::uint64_t seed);

// Max |Gram - I| entry < tol.
bool check_orthonormal(const OrthonormalBasis& basis, double tol);

}  // namespace pstomo
