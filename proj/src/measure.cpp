#include "pstomo/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "pstomo/errors.hpp"
#include "pstomo/rng.hpp"

namespace pstomo {

ProbabilityVector exact_probs(const PureState& psi, const OrthonormalBasis& basis) {
    if (psi.dim() != basis.dim) {
        throw DimensionMismatch("exact_probs: state and basis dimension differ");
    }
    ProbabilityVector out;
    out.basis_id = basis.id;
    out.p.reserve(basis.vectors.size());
    for (const auto& v : basis.vectors) {
        cx acc = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) acc += std::conj(v[k]) * psi.amps[k];
        out.p.push_back(std::norm(acc));
    }
    return out;
}

CountRecord sample_counts(const ProbabilityVector& probs, std::int64_t shots, std::uint64_t seed) {
    if (shots < 1) throw InvalidParams("sample_counts: shots must be >= 1");
    double total = 0.0;
    for (double p : probs.p) {
        if (p < -1e-9) throw InvalidParams("sample_counts: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-6) {
        throw InvalidParams("sample_counts: probabilities do not sum to 1");
    }
    std::vector<double> cum(probs.p.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < probs.p.size(); ++j) {
        acc += std::max(0.0, probs.p[j]) / total;
        cum[j] = acc;
    }
    cum.back() = 1.0;

    CountRecord rec;
    rec.basis_id = probs.basis_id;
    rec.counts.assign(probs.p.size(), 0);
    rec.shots = shots;
    Rng rng(seed);
    for (std::int64_t s = 0; s < shots; ++s) {
        double u = rng.uniform();
        auto it = std::upper_bound(cum.begin(), cum.end(), u);
        std::size_t j = std::min(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
        ++rec.counts[j];
    }
    return rec;
}

ProbabilityVector to_frequencies(const CountRecord& record) {
    if (record.shots < 1) throw InvalidParams("to_frequencies: shots must be >= 1");
    ProbabilityVector out;
    out.basis_id = record.basis_id;
    out.p.reserve(record.counts.size());
    for (std::int64_t n : record.counts) {
        out.p.push_back(static_cast<double>(n) / static_cast<double>(record.shots));
    }
    return out;
}

std::array<CountRecord, 3> simulate_counts_3bb(const PureState& truth, const ThreeBasisSet& bases,
                                               std::int64_t shots_per_basis, std::uint64_t seed) {
    std::array<const OrthonormalBasis*, 3> bs{&bases.canonical, &bases.b1p, &bases.b3p};
    std::array<CountRecord, 3> out;
    for (std::size_t r = 0; r < 3; ++r) {
        out[r] = sample_counts(exact_probs(truth, *bs[r]), shots_per_basis,
                               derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    }
    return out;
}

std::array<CountRecord, 5> simulate_counts_5bb(const PureState& truth, const PairBasisParams& params,
                                               std::int64_t shots_per_basis, std::uint64_t seed) {
    auto pair_bases = five_bases(truth.dim(), params);
    std::array<CountRecord, 5> out;
    out[0] = sample_counts(exact_probs(truth, canonical(truth.dim())), shots_per_basis,
                           derive_seed(seed, {0u}));
    for (std::size_t r = 1; r < 5; ++r) {
        out[r] = sample_counts(exact_probs(truth, pair_bases[r - 1]), shots_per_basis,
                               derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    }
    return out;
}

std::array<ProbabilityVector, 3> exact_probs_3bb(const PureState& truth, const ThreeBasisSet& bases) {
    return {exact_probs(truth, bases.canonical), exact_probs(truth, bases.b1p),
            exact_probs(truth, bases.b3p)};
}

std::array<ProbabilityVector, 5> exact_probs_5bb(const PureState& truth, const PairBasisParams& params) {
    auto pair_bases = five_bases(truth.dim(), params);
    return {exact_probs(truth, canonical(truth.dim())), exact_probs(truth, pair_bases[0]),
            exact_probs(truth, pair_bases[1]), exact_probs(truth, pair_bases[2]),
            exact_probs(truth, pair_bases[3])};
}

}  // namespace pstomo
