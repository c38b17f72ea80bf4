#include "pstomo/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pstomo/errors.hpp"
#include "pstomo/rng.hpp"

namespace pstomo {

namespace {

constexpr int kMaxEnumerationDim = 24;

void require_ab(const PairBasisParams& params) {
    if (params.a * params.b < 1e-6) {
        throw InvalidParams("pair basis params: a*b too small to invert");
    }
}

// Walks one support arc and turns a sign word into amplitudes. Sign bits
// are consumed in arc order; bits beyond the last used link are don't-cares,
// which is what keeps the candidate count at exactly 2^(d-1).
class CandidateBuilder {
public:
    CandidateBuilder(const LambdaChain& chain, std::span<const double> q, double zero_eps)
        : d_(chain.dim) {
        moduli_.resize(static_cast<std::size_t>(d_));
        for (int j = 0; j < d_; ++j) {
            moduli_[static_cast<std::size_t>(j)] = std::sqrt(std::max(0.0, q[static_cast<std::size_t>(j)]));
        }
        ZeroPattern pat = classify_support(q, zero_eps);
        if (pat.arcs.empty()) {
            throw AmbiguousSupport("no canonical outcome above the zero threshold");
        }
        if (pat.ambiguous()) {
            throw AmbiguousSupport("support splits into " + std::to_string(pat.arcs.size()) +
                                   " arcs; adapt the bases to the subspace");
        }
        arc_ = pat.arcs.front();
        for (std::size_t t = 0; t + 1 < arc_.size(); ++t) {
            int k = arc_[t];
            double re, im;
            if (k == d_ - 1) {
                if (!chain.wrap_re) {
                    throw AmbiguousSupport("support wraps but no wraparound correlator available");
                }
                re = *chain.wrap_re;
                im = chain.wrap_im_mag;
            } else {
                re = chain.re[static_cast<std::size_t>(k)];
                im = chain.im_mag[static_cast<std::size_t>(k)];
            }
            link_k_.push_back(k);
            arg_plus_.push_back(std::atan2(im, re));
            arg_minus_.push_back(std::atan2(-im, re));
        }
    }

    int dim() const { return d_; }
    int num_links() const { return static_cast<int>(link_k_.size()); }

    void build_raw(std::uint64_t word, std::vector<cx>& amps) const {
        amps.assign(static_cast<std::size_t>(d_), cx(0.0, 0.0));
        for (int j = 0; j < d_; ++j) {
            amps[static_cast<std::size_t>(j)] = moduli_[static_cast<std::size_t>(j)];
        }
        double theta = 0.0;
        for (std::size_t t = 0; t + 1 < arc_.size(); ++t) {
            theta -= ((word >> t) & 1u) ? arg_minus_[t] : arg_plus_[t];
            std::size_t j = static_cast<std::size_t>(arc_[t + 1]);
            amps[j] = moduli_[j] * cx(std::cos(theta), std::sin(theta));
        }
    }

    PureState build(std::uint64_t word) const {
        std::vector<cx> amps;
        build_raw(word, amps);
        return make_state(std::move(amps));
    }

    // Per-link-k signs; unused links report +1.
    SignVector signs_for(std::uint64_t word) const {
        SignVector s(static_cast<std::size_t>(d_ - 1), +1);
        for (std::size_t t = 0; t < link_k_.size(); ++t) {
            int k = link_k_[t];
            if (k < d_ - 1 && ((word >> t) & 1u)) s[static_cast<std::size_t>(k)] = -1;
        }
        return s;
    }

private:
    int d_;
    std::vector<double> moduli_;
    std::vector<int> arc_;
    std::vector<int> link_k_;
    std::vector<double> arg_plus_, arg_minus_;
};

double outcome_loglik(std::span<const cx> amps, const OrthonormalBasis& basis, int outcome,
                      double weight, double floor) {
    if (weight == 0.0) return 0.0;
    const auto& phi = basis.vectors[static_cast<std::size_t>(outcome)];
    cx ov = 0.0;
    for (std::size_t k = 0; k < amps.size(); ++k) {
        ov += std::conj(phi[k]) * amps[k];
    }
    return weight * std::log(std::max(std::norm(ov), floor));
}

// Completions of both bases plus the wraparound pair-plus outcome of B3p
// (B3p outcome d/2 - 1, the vector a|d-1> + b|0>).
double loglik_raw(std::span<const cx> amps, const ThreeBasisSet& bases,
                  std::span<const double> weights_b1p, std::span<const double> weights_b3p,
                  double floor) {
    const int d = static_cast<int>(amps.size());
    const int half = d / 2;
    double acc = 0.0;
    for (int j = half; j < d; ++j) {
        acc += outcome_loglik(amps, bases.b1p, j, weights_b1p[static_cast<std::size_t>(j)], floor);
        acc += outcome_loglik(amps, bases.b3p, j, weights_b3p[static_cast<std::size_t>(j)], floor);
    }
    acc += outcome_loglik(amps, bases.b3p, half - 1,
                          weights_b3p[static_cast<std::size_t>(half - 1)], floor);
    return acc;
}

struct ResolvedEps {
    double zero;
    double pair;
    double tie_gap;
};

ResolvedEps resolve_eps(const EstimateOptions& opts, double shots_for_eps) {
    bool exact = shots_for_eps <= 0.0;
    double auto_eps = exact ? 1e-6 : 0.5 / shots_for_eps;
    return {opts.zero_eps >= 0.0 ? opts.zero_eps : auto_eps,
            opts.pair_eps >= 0.0 ? opts.pair_eps : auto_eps,
            opts.tie_gap >= 0.0 ? opts.tie_gap : (exact ? 1e-9 : 3.0)};
}

void check_vector_len(const std::vector<double>& v, int d, const char* what) {
    if (static_cast<int>(v.size()) != d) {
        throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(d) + " entries");
    }
}

EstimationReport estimate_3bb_impl(const std::array<std::vector<double>, 3>& freqs,
                                   const std::array<std::vector<double>, 3>& weights,
                                   double shots_for_eps, const ThreeBasisSet& bases,
                                   const EstimateOptions& opts) {
    const int d = bases.dim();
    if (d > kMaxEnumerationDim) {
        throw EnumerationTooLarge("estimate_3bb: enumeration capped at d <= 24");
    }
    check_vector_len(freqs[0], d, "canonical frequencies");
    check_vector_len(freqs[1], d, "B1p frequencies");
    check_vector_len(freqs[2], d, "B3p frequencies");
    auto [zero_eps, pair_eps, tie_gap] = resolve_eps(opts, shots_for_eps);

    const std::vector<double>& q = freqs[0];
    LambdaChain chain = build_lambda_chain(
        q, std::span<const double>(freqs[1]).first(static_cast<std::size_t>(d / 2)),
        std::span<const double>(freqs[2]).first(static_cast<std::size_t>(d / 2)), bases.params);

    CandidateBuilder builder(chain, q, zero_eps);

    const std::uint64_t n_words = std::uint64_t{1} << (d - 1);
    std::vector<double> logliks(n_words);
    std::vector<cx> scratch;
    std::uint64_t best = 0;
    for (std::uint64_t w = 0; w < n_words; ++w) {
        builder.build_raw(w, scratch);
        logliks[w] = loglik_raw(scratch, bases, weights[1], weights[2], opts.likelihood_floor);
        if (logliks[w] > logliks[best]) best = w;  // ties keep the smallest word
    }

    EstimationReport report;
    report.estimate = builder.build(best);
    report.chosen_signs = builder.signs_for(best);
    report.flags.equal_pairs_detected = detect_equal_pairs(q, pair_eps);
    report.flags.clamped_k = chain.clamped_k;
    report.bases = bases;

    // A tie needs a near-equal log-likelihood on a genuinely different state;
    // duplicate words that rebuild the same state do not count.
    const double best_ll = logliks[best];
    for (std::uint64_t w = 0; w < n_words && !report.flags.likelihood_tie; ++w) {
        if (w == best || logliks[w] < best_ll - tie_gap) continue;
        PureState other = builder.build(w);
        if (infidelity(report.estimate, other) > 1e-9) {
            report.flags.likelihood_tie = true;
        }
    }

    std::sort(logliks.begin(), logliks.end(), std::greater<double>());
    report.loglik_ranking = std::move(logliks);
    return report;
}

std::vector<double> counts_to_freqs(const CountRecord& rec) {
    ProbabilityVector pv = to_frequencies(rec);
    return pv.p;
}

std::vector<double> counts_to_weights(const CountRecord& rec) {
    std::vector<double> w;
    w.reserve(rec.counts.size());
    for (std::int64_t n : rec.counts) w.push_back(static_cast<double>(n));
    return w;
}

void check_record_id(const CountRecord& rec, const std::string& id) {
    if (rec.basis_id != id) {
        throw InvalidParams("estimate: expected record for " + id + ", got " + rec.basis_id);
    }
}

void check_prob_sum(const std::vector<double>& p, const char* what) {
    double s = 0.0;
    for (double x : p) {
        if (x < -1e-12) throw InvalidParams(std::string(what) + ": negative probability");
        s += x;
    }
    if (std::abs(s - 1.0) > 0.05) {
        throw InvalidParams(std::string(what) + ": probabilities sum to " + std::to_string(s));
    }
}

}  // namespace

std::vector<double> lambda_real(std::span<const double> canonical_freqs,
                                std::span<const double> pplus_freqs,
                                const PairBasisParams& params, int shift) {
    require_ab(params);
    if (shift != 0 && shift != 1) throw InvalidParams("lambda_real: shift must be 0 or 1");
    const int d = static_cast<int>(canonical_freqs.size());
    const int half = d / 2;
    if (static_cast<int>(pplus_freqs.size()) != half) {
        throw DimensionMismatch("lambda_real: need d/2 pair-plus frequencies");
    }
    const double a = params.a;
    const double b = params.b;
    std::vector<double> out(static_cast<std::size_t>(half));
    for (int v = 0; v < half; ++v) {
        const int lo = (2 * v + shift) % d;
        const int hi = (2 * v + 1 + shift) % d;
        out[static_cast<std::size_t>(v)] =
            (pplus_freqs[static_cast<std::size_t>(v)] -
             a * a * canonical_freqs[static_cast<std::size_t>(lo)] -
             b * b * canonical_freqs[static_cast<std::size_t>(hi)]) /
            (a * b);
    }
    return out;
}

double lambda_imag_magnitude(double re_k, double q_k, double q_k1, bool* clamped) {
    double radicand = 4.0 * q_k * q_k1 - re_k * re_k;
    if (clamped) *clamped = radicand < -1e-9;
    return std::sqrt(std::max(0.0, radicand));
}

LambdaChain build_lambda_chain(std::span<const double> canonical_freqs,
                               std::span<const double> pplus_b1,
                               std::span<const double> pplus_b3,
                               const PairBasisParams& params) {
    const int d = static_cast<int>(canonical_freqs.size());
    std::vector<double> even = lambda_real(canonical_freqs, pplus_b1, params, 0);
    std::vector<double> odd = lambda_real(canonical_freqs, pplus_b3, params, 1);

    LambdaChain chain;
    chain.dim = d;
    chain.re.resize(static_cast<std::size_t>(d - 1));
    chain.im_mag.resize(static_cast<std::size_t>(d - 1));
    for (int k = 0; k < d - 1; ++k) {
        chain.re[static_cast<std::size_t>(k)] = (k % 2 == 0) ? even[static_cast<std::size_t>(k / 2)]
                                                             : odd[static_cast<std::size_t>(k / 2)];
        bool clamped = false;
        chain.im_mag[static_cast<std::size_t>(k)] =
            lambda_imag_magnitude(chain.re[static_cast<std::size_t>(k)],
                                  canonical_freqs[static_cast<std::size_t>(k)],
                                  canonical_freqs[static_cast<std::size_t>(k + 1)], &clamped);
        if (clamped) chain.clamped_k.push_back(k);
    }
    chain.wrap_re = odd.back();  // pair (d-1, 0)
    bool wrap_clamped = false;
    chain.wrap_im_mag = lambda_imag_magnitude(*chain.wrap_re,
                                              canonical_freqs[static_cast<std::size_t>(d - 1)],
                                              canonical_freqs[0], &wrap_clamped);
    if (wrap_clamped) chain.clamped_k.push_back(d - 1);
    return chain;
}

std::vector<Candidate> enumerate_candidates(const LambdaChain& chain,
                                            std::span<const double> canonical_freqs,
                                            double zero_eps) {
    if (chain.dim > kMaxEnumerationDim) {
        throw EnumerationTooLarge("enumerate_candidates: capped at d <= 24");
    }
    CandidateBuilder builder(chain, canonical_freqs, zero_eps);
    const std::uint64_t n_words = std::uint64_t{1} << (chain.dim - 1);
    std::vector<Candidate> out;
    out.reserve(n_words);
    for (std::uint64_t w = 0; w < n_words; ++w) {
        Candidate c;
        c.state = builder.build(w);
        c.signs = builder.signs_for(w);
        out.push_back(std::move(c));
    }
    return out;
}

double log_likelihood(const PureState& candidate, const ThreeBasisSet& bases,
                      std::span<const double> weights_b1p,
                      std::span<const double> weights_b3p, double floor) {
    if (candidate.dim() != bases.dim()) {
        throw DimensionMismatch("log_likelihood: candidate dimension mismatch");
    }
    if (static_cast<int>(weights_b1p.size()) != candidate.dim() ||
        static_cast<int>(weights_b3p.size()) != candidate.dim()) {
        throw DimensionMismatch("log_likelihood: need full d-length weight vectors");
    }
    return loglik_raw(candidate.amps, bases, weights_b1p, weights_b3p, floor);
}

EstimationReport estimate_3bb(const std::array<CountRecord, 3>& records,
                              const ThreeBasisSet& bases, const EstimateOptions& opts) {
    check_record_id(records[0], "B0");
    check_record_id(records[1], "B1p");
    check_record_id(records[2], "B3p");
    std::array<std::vector<double>, 3> freqs;
    std::array<std::vector<double>, 3> weights;
    for (int i = 0; i < 3; ++i) {
        freqs[static_cast<std::size_t>(i)] = counts_to_freqs(records[static_cast<std::size_t>(i)]);
        weights[static_cast<std::size_t>(i)] = counts_to_weights(records[static_cast<std::size_t>(i)]);
    }
    return estimate_3bb_impl(freqs, weights, static_cast<double>(records[0].shots), bases, opts);
}

EstimationReport estimate_3bb_exact(const std::array<ProbabilityVector, 3>& probs,
                                    const ThreeBasisSet& bases, const EstimateOptions& opts) {
    std::array<std::vector<double>, 3> freqs{probs[0].p, probs[1].p, probs[2].p};
    for (const auto& f : freqs) check_prob_sum(f, "estimate_3bb_exact");
    return estimate_3bb_impl(freqs, freqs, 0.0, bases, opts);
}

namespace {

PureState estimate_5bb_impl(const std::array<std::vector<double>, 5>& freqs,
                            const PairBasisParams& params, double shots_for_eps,
                            const EstimateOptions& opts) {
    require_ab(params);
    const int d = static_cast<int>(freqs[0].size());
    if (d < 4 || d % 2 != 0) throw UnsupportedDimension("estimate_5bb: even d >= 4 required");
    for (int i = 1; i < 5; ++i) check_vector_len(freqs[static_cast<std::size_t>(i)], d, "pair basis frequencies");
    auto [zero_eps, pair_eps, tie_gap] = resolve_eps(opts, shots_for_eps);
    (void)pair_eps;
    (void)tie_gap;

    const std::vector<double>& q = freqs[0];
    const double two_ab = 2.0 * params.a * params.b;
    const double asym = params.a * params.a - params.b * params.b;

    // Signed correlators for every link, wraparound included. Outcome 2v is
    // the + partner and 2v+1 its orthogonal complement; the asymmetry term
    // cancels the (a^2 - b^2)(q_k - q_{k+1}) offset the complement picks up
    // and vanishes at a = b, where this is the plain frequency difference.
    // The -i projector minus the +i one yields Im(2 c_k conj(c_{k+1})).
    std::vector<double> re(static_cast<std::size_t>(d)), im(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        const int v = k / 2;
        const auto& fre = (k % 2 == 0) ? freqs[1] : freqs[3];
        const auto& fim = (k % 2 == 0) ? freqs[2] : freqs[4];
        const double dq =
            q[static_cast<std::size_t>(k)] - q[static_cast<std::size_t>((k + 1) % d)];
        re[static_cast<std::size_t>(k)] =
            (fre[static_cast<std::size_t>(2 * v)] - fre[static_cast<std::size_t>(2 * v + 1)] -
             asym * dq) /
            two_ab;
        im[static_cast<std::size_t>(k)] =
            (fim[static_cast<std::size_t>(2 * v + 1)] - fim[static_cast<std::size_t>(2 * v)] +
             asym * dq) /
            two_ab;
    }

    ZeroPattern pat = classify_support(q, zero_eps);
    if (pat.arcs.empty()) throw AmbiguousSupport("no canonical outcome above the zero threshold");
    if (pat.ambiguous()) {
        throw AmbiguousSupport("support splits into " + std::to_string(pat.arcs.size()) +
                               " arcs; adapt the bases to the subspace");
    }
    const std::vector<int>& arc = pat.arcs.front();

    std::vector<cx> amps(static_cast<std::size_t>(d), cx(0.0, 0.0));
    for (int j = 0; j < d; ++j) {
        amps[static_cast<std::size_t>(j)] = std::sqrt(std::max(0.0, q[static_cast<std::size_t>(j)]));
    }
    double theta = 0.0;
    for (std::size_t t = 0; t + 1 < arc.size(); ++t) {
        int k = arc[t];
        theta -= std::atan2(im[static_cast<std::size_t>(k)], re[static_cast<std::size_t>(k)]);
        std::size_t j = static_cast<std::size_t>(arc[t + 1]);
        amps[j] = std::abs(amps[j]) * cx(std::cos(theta), std::sin(theta));
    }
    return make_state(std::move(amps));
}

}  // namespace

PureState estimate_5bb(const std::array<CountRecord, 5>& records, const PairBasisParams& params,
                       const EstimateOptions& opts) {
    check_record_id(records[0], "B0");
    for (int i = 1; i < 5; ++i) {
        check_record_id(records[static_cast<std::size_t>(i)], "B" + std::to_string(i));
    }
    std::array<std::vector<double>, 5> freqs;
    for (int i = 0; i < 5; ++i) {
        freqs[static_cast<std::size_t>(i)] = counts_to_freqs(records[static_cast<std::size_t>(i)]);
    }
    return estimate_5bb_impl(freqs, params, static_cast<double>(records[0].shots), opts);
}

PureState estimate_5bb_exact(const std::array<ProbabilityVector, 5>& probs,
                             const PairBasisParams& params, const EstimateOptions& opts) {
    std::array<std::vector<double>, 5> freqs;
    for (int i = 0; i < 5; ++i) {
        freqs[static_cast<std::size_t>(i)] = probs[static_cast<std::size_t>(i)].p;
        check_prob_sum(freqs[static_cast<std::size_t>(i)], "estimate_5bb_exact");
    }
    return estimate_5bb_impl(freqs, params, 0.0, opts);
}

EstimationReport estimate_3bb_with_retry(int d, const ThreeBasisSet& initial_bases,
                                         const AttemptFn& attempt, std::uint64_t seed,
                                         const RetryPolicy& policy) {
    auto triggered = [&policy](const EstimationReport& r) {
        return (policy.on_equal_pairs && r.flags.equal_pairs_detected) ||
               (policy.on_tie && r.flags.likelihood_tie);
    };
    auto badness = [](const EstimationReport& r) {
        return (r.flags.equal_pairs_detected ? 1 : 0) + (r.flags.likelihood_tie ? 1 : 0);
    };

    std::optional<EstimationReport> first = attempt(initial_bases, 0);
    if (!first) throw InvalidParams("estimate_3bb_with_retry: initial attempt yielded no data");
    EstimationReport current = std::move(*first);
    EstimationReport best = current;
    int best_badness = badness(best);
    int retries = 0;
    bool exhausted = false;

    while (triggered(current)) {
        if (retries >= policy.max_retries) {
            exhausted = true;
            break;
        }
        ThreeBasisSet rebased =
            random_three_bases(d, derive_seed(seed, {0xB5u, static_cast<std::uint64_t>(retries + 1)}));
        std::optional<EstimationReport> next = attempt(rebased, retries + 1);
        if (!next) {
            exhausted = true;  // source cannot re-measure
            break;
        }
        ++retries;
        current = std::move(*next);
        if (badness(current) <= best_badness) {
            best = current;
            best_badness = badness(best);
        }
    }
    if (!triggered(current)) best = current;
    best.retries = retries;
    best.flags.retries_exhausted = exhausted;
    return best;
}

}  // namespace pstomo
