#include "pstomo/state.hpp"

#include <algorithm>
#include <cmath>

#include "pstomo/errors.hpp"
#include "pstomo/rng.hpp"

namespace pstomo {

namespace {
constexpr double kZeroModulus = 1e-12;
}

PureState make_state(std::vector<cx> amplitudes) {
    if (amplitudes.size() < 2) {
        throw UnsupportedDimension("make_state: need at least 2 amplitudes");
    }
    double norm2 = 0.0;
    double max_mod = 0.0;
    for (const cx& c : amplitudes) {
        norm2 += std::norm(c);
        max_mod = std::max(max_mod, std::abs(c));
    }
    if (max_mod < kZeroModulus) {
        throw ZeroVector("make_state: all amplitudes below 1e-12");
    }
    // Skip the rescale when already normalized so the map is exactly
    // idempotent at the bit level.
    if (std::abs(norm2 - 1.0) > 1e-14) {
        double inv = 1.0 / std::sqrt(norm2);
        for (cx& c : amplitudes) c *= inv;
    }
    std::size_t anchor = 0;
    while (anchor < amplitudes.size() && std::abs(amplitudes[anchor]) <= kZeroModulus) ++anchor;
    cx a = amplitudes[anchor];
    if (a.imag() != 0.0 || a.real() < 0.0) {
        cx phase = std::conj(a) / std::abs(a);
        for (cx& c : amplitudes) c *= phase;
        amplitudes[anchor] = cx(std::abs(a), 0.0);
    }
    return PureState{std::move(amplitudes)};
}

PureState haar_random(int d, std::uint64_t seed) {
    if (d < 4 || d % 2 != 0) {
        throw UnsupportedDimension("haar_random: dimension must be even and >= 4");
    }
    Rng rng(seed);
    std::vector<cx> amps(static_cast<std::size_t>(d));
    for (cx& c : amps) c = rng.complex_normal();
    return make_state(std::move(amps));
}

cx inner_product(const PureState& bra, const PureState& ket) {
    if (bra.dim() != ket.dim()) {
        throw DimensionMismatch("inner_product: dimension mismatch");
    }
    cx acc = 0.0;
    for (std::size_t k = 0; k < bra.amps.size(); ++k) {
        acc += std::conj(bra.amps[k]) * ket.amps[k];
    }
    return acc;
}

double infidelity(const PureState& psi, const PureState& phi) {
    double overlap = std::norm(inner_product(phi, psi));
    return std::clamp(1.0 - overlap, 0.0, 1.0);
}

std::vector<cx> pair_correlators(const PureState& psi) {
    const int d = psi.dim();
    std::vector<cx> lam(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        lam[static_cast<std::size_t>(k)] = 2.0 * psi[k] * std::conj(psi[(k + 1) % d]);
    }
    return lam;
}

ZeroPattern classify_support(std::span<const double> canonical_freqs, double eps) {
    const int d = static_cast<int>(canonical_freqs.size());
    ZeroPattern pat;
    pat.dim = d;
    std::vector<bool> zero(static_cast<std::size_t>(d));
    int nonzero_count = 0;
    for (int j = 0; j < d; ++j) {
        zero[static_cast<std::size_t>(j)] = canonical_freqs[static_cast<std::size_t>(j)] < eps;
        if (zero[static_cast<std::size_t>(j)]) {
            pat.zero_indices.push_back(j);
        } else {
            ++nonzero_count;
        }
    }
    if (nonzero_count == 0) return pat;
    if (nonzero_count == d) {
        std::vector<int> full(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) full[static_cast<std::size_t>(j)] = j;
        pat.arcs.push_back(std::move(full));
        return pat;
    }
    // An arc starts wherever a nonzero index follows a zero one (mod d).
    for (int j = 0; j < d; ++j) {
        if (zero[static_cast<std::size_t>(j)] || !zero[static_cast<std::size_t>((j + d - 1) % d)]) continue;
        std::vector<int> arc;
        int i = j;
        while (!zero[static_cast<std::size_t>(i)]) {
            arc.push_back(i);
            i = (i + 1) % d;
        }
        pat.arcs.push_back(std::move(arc));
    }
    return pat;
}

bool detect_equal_pairs(std::span<const double> canonical_freqs, double eps) {
    const int d = static_cast<int>(canonical_freqs.size());
    std::vector<std::pair<int, int>> equal;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            if (std::abs(canonical_freqs[static_cast<std::size_t>(i)] -
                         canonical_freqs[static_cast<std::size_t>(j)]) <= eps) {
                equal.emplace_back(i, j);
            }
        }
    }
    for (std::size_t u = 0; u < equal.size(); ++u) {
        for (std::size_t v = u + 1; v < equal.size(); ++v) {
            auto [a, b] = equal[u];
            auto [c, e] = equal[v];
            if (a != c && a != e && b != c && b != e) return true;
        }
    }
    return false;
}

}  // namespace pstomo
