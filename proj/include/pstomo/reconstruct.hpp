#pragma once

// Estimation algorithms: pair-correlator extraction from measured
// frequencies, sign-candidate enumeration with chain solving, likelihood
// selection (three-basis method), and the five-basis baseline.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pstomo/basis.hpp"
#include "pstomo/measure.hpp"
#include "pstomo/state.hpp"

namespace pstomo {

// Measured pair correlators L_k = 2 c_k conj(c_{k+1}). The real parts come
// from pair-plus frequencies; the imaginary parts are known in magnitude
// only, via |Im L_k|^2 = 4 q_k q_{k+1} - Re(L_k)^2. The k = d-1 entry is
// redundant for a fully supported state but closes the chain when the
// support wraps around the d-1 / 0 boundary.
struct LambdaChain {
    int dim = 0;
    std::vector<double> re;      // k = 0..d-2
    std::vector<double> im_mag;  // k = 0..d-2, nonnegative
    std::optional<double> wrap_re;
    double wrap_im_mag = 0.0;
    std::vector<int> clamped_k;  // links whose radicand fell below -1e-9
};

// One sign per link k = 0..d-2, +1 or -1.
using SignVector = std::vector<int>;

struct Candidate {
    PureState state;
    SignVector signs;
    double loglik = 0.0;
};

struct ReportFlags {
    bool ambiguous_support = false;
    bool equal_pairs_detected = false;
    bool likelihood_tie = false;
    bool retries_exhausted = false;
    std::vector<int> clamped_k;
};

struct EstimationReport {
    PureState estimate;
    SignVector chosen_signs;
    std::vector<double> loglik_ranking;  // descending
    ReportFlags flags;
    ThreeBasisSet bases;
    int retries = 0;
};

struct EstimateOptions {
    // Negative values select the defaults: 1e-6 for exact probabilities,
    // 0.5/shots for counts (so an index is zero iff it received no counts).
    double zero_eps = -1.0;
    double pair_eps = -1.0;
    // Log-likelihood gap below which the top two distinct candidates count
    // as tied. Negative selects the default: 1e-9 for exact probabilities;
    // for counts 3.0, the scale at which finite statistics genuinely cannot
    // tell the two sign assignments apart (the weights are raw counts, so
    // gaps are in plain log-likelihood-ratio units).
    double tie_gap = -1.0;
    double likelihood_floor = 1e-12;
};

// Re(L_k) = (pplus_v - a^2 q_k - b^2 q_{k+1}) / (a b) for k = 2v + shift.
// At a = b = 1/sqrt(2) this is 2 p+ - q_k - q_{k+1}.
std::vector<double> lambda_real(std::span<const double> canonical_freqs,
                                std::span<const double> pplus_freqs,
                                const PairBasisParams& params, int shift);

// sqrt(max(0, 4 q_k q_{k+1} - re_k^2)); sets *clamped when the radicand is
// below -1e-9 (shot noise routinely produces slightly negative values).
double lambda_imag_magnitude(double re_k, double q_k, double q_k1, bool* clamped = nullptr);

LambdaChain build_lambda_chain(std::span<const double> canonical_freqs,
                               std::span<const double> pplus_b1,
                               std::span<const double> pplus_b3,
                               const PairBasisParams& params);

// All 2^(d-1) sign assignments, chained along the single support arc.
// Moduli are sqrt(q_j); phases accumulate as theta_{k+1} = theta_k - arg(L_k).
// Duplicate states (links with zero imaginary part, or links unused because
// the arc is shorter than d) are retained so the count is exact.
// Throws AmbiguousSupport for multi-arc patterns, EnumerationTooLarge for d > 24.
std::vector<Candidate> enumerate_candidates(const LambdaChain& chain,
                                            std::span<const double> canonical_freqs,
                                            double zero_eps);

// sum_j w_j log(max(|<phi_j|candidate>|^2, floor)) over the outcomes that
// discriminate between candidates: the completion vectors of both pair
// bases plus the wraparound pair-plus vector a|d-1> + b|0> of B3p. The
// other pair-plus outcomes are omitted because every candidate reproduces
// them identically (their real parts were extracted from those very
// frequencies), so they would only shift all candidates equally. Without
// the wraparound outcome the selection loses its optimality guarantee:
// a wrong-sign candidate can trade probability mass between that outcome
// and the completions. Weights are the full d-length outcome weight
// vectors (raw counts are fine; a positive scale shifts every candidate
// equally).
double log_likelihood(const PureState& candidate, const ThreeBasisSet& bases,
                      std::span<const double> weights_b1p,
                      std::span<const double> weights_b3p,
                      double floor = 1e-12);

// Records must be ordered B0, B1p, B3p and match the basis set.
EstimationReport estimate_3bb(const std::array<CountRecord, 3>& records,
                              const ThreeBasisSet& bases, const EstimateOptions& opts = {});

// Same pipeline fed with exact probabilities (the infinite-ensemble limit).
EstimationReport estimate_3bb_exact(const std::array<ProbabilityVector, 3>& probs,
                                    const ThreeBasisSet& bases, const EstimateOptions& opts = {});

// Five-basis baseline: records ordered B0, B1, B2, B3, B4. Both parts of
// every L_k are measured, so no enumeration is needed.
PureState estimate_5bb(const std::array<CountRecord, 5>& records,
                       const PairBasisParams& params, const EstimateOptions& opts = {});

PureState estimate_5bb_exact(const std::array<ProbabilityVector, 5>& probs,
                             const PairBasisParams& params, const EstimateOptions& opts = {});

struct RetryPolicy {
    int max_retries = 3;
    bool on_equal_pairs = true;
    bool on_tie = true;
};

// Runs one estimation attempt against a given basis set; returns nullopt
// if the data source cannot re-measure (file-ingested counts).
using AttemptFn = std::function<std::optional<EstimationReport>(const ThreeBasisSet&, int attempt)>;

// Estimates with the initial bases; while the report is flagged degenerate
// (equal pairs / likelihood tie, per policy), re-randomizes the bases and
// re-measures, up to max_retries. If the flags never clear, returns the
// best attempt with retries_exhausted set.
EstimationReport estimate_3bb_with_retry(int d, const ThreeBasisSet& initial_bases,
                                         const AttemptFn& attempt, std::uint64_t seed,
                                         const RetryPolicy& policy = {});

}  // namespace pstomo
