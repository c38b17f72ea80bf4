#include "pstomo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pstomo/errors.hpp"
#include "pstomo/measure.hpp"
#include "pstomo/rng.hpp"

namespace pstomo {

double trial_average_infidelity(const PureState& truth, std::span<const PureState> estimates) {
    if (estimates.empty()) throw EmptyInput("trial_average_infidelity: no estimates");
    double acc = 0.0;
    for (const PureState& est : estimates) acc += infidelity(truth, est);
    return acc / static_cast<double>(estimates.size());
}

bool omega_f_flag(const EstimationReport& report, const PureState& truth, double tol) {
    const int d = truth.dim();
    if (report.estimate.dim() != d) {
        throw DimensionMismatch("omega_f_flag: report and truth dimension differ");
    }
    std::vector<cx> lam = pair_correlators(truth);
    for (int k = 0; k < d - 1; ++k) {
        double im = lam[static_cast<std::size_t>(k)].imag();
        if (std::abs(im) <= tol) continue;
        int true_sign = im > 0.0 ? +1 : -1;
        if (report.chosen_signs[static_cast<std::size_t>(k)] != true_sign) return true;
    }
    return false;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    double h = p * static_cast<double>(n - 1);
    std::size_t lo = static_cast<std::size_t>(h);
    if (lo >= n - 1) return sorted[n - 1];
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

Stats aggregate_stats(std::vector<double> values) {
    if (values.empty()) throw EmptyInput("aggregate_stats: no values");
    Stats s;
    double acc = 0.0;
    for (double v : values) acc += v;
    s.mean = acc / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    s.q25 = quantile_sorted(values, 0.25);
    s.median = quantile_sorted(values, 0.50);
    s.q75 = quantile_sorted(values, 0.75);
    return s;
}

namespace {

void validate_config(const SweepConfig& cfg) {
    if (cfg.dimensions.empty() || cfg.shots_grid.empty()) {
        throw InvalidParams("sweep config: dimensions and shots must be nonempty");
    }
    for (int d : cfg.dimensions) {
        if (d < 4 || d % 2 != 0) {
            throw UnsupportedDimension("sweep config: dimension " + std::to_string(d) +
                                       " is not an even integer >= 4");
        }
    }
    for (std::int64_t n : cfg.shots_grid) {
        if (n < 1) throw InvalidParams("sweep config: shots must be >= 1");
    }
    if (cfg.states < 1 || cfg.trials < 1) {
        throw InvalidParams("sweep config: states and trials must be >= 1");
    }
    if (cfg.retries < 0) throw InvalidParams("sweep config: retries must be >= 0");
}

struct TrialOutcome {
    bool failed = false;
    bool omega = false;
    double infid = 0.0;
};

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& cfg, std::ostream* progress) {
    validate_config(cfg);
    std::vector<SweepRow> rows;

    for (int d : cfg.dimensions) {
        ThreeBasisSet bases = three_bases(d, default_params(d));
        std::vector<PureState> truths;
        truths.reserve(static_cast<std::size_t>(cfg.states));
        for (int j = 0; j < cfg.states; ++j) {
            truths.push_back(haar_random(
                d, derive_seed(cfg.seed, {1u, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(j)})));
        }

        for (std::int64_t shots : cfg.shots_grid) {
            // Fixed classification tolerance: a sign only counts as wrong on
            // links with |Im L_k| above it. Scaling the tolerance with the
            // shot noise (2/sqrt(N)) makes the flagged fraction grow with N
            // (more links become testable faster than flips die out), the
            // opposite of the observed decay, so the threshold stays fixed.
            const double omega_tol = 0.1;
            SweepRow row;
            row.d = d;
            row.shots = shots;
            row.total_ensemble = shots * (cfg.method == Method::ThreeBB ? 3 : 5);

            std::vector<double> state_means;
            double omega_sum = 0.0, comp_sum = 0.0;
            std::int64_t omega_count = 0, comp_count = 0;

            for (int j = 0; j < cfg.states; ++j) {
                const PureState& truth = truths[static_cast<std::size_t>(j)];
                double state_acc = 0.0;
                int state_ok = 0;
                for (int i = 0; i < cfg.trials; ++i) {
                    std::uint64_t tseed = derive_seed(
                        cfg.seed, {2u, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(shots),
                                   static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(i)});
                    TrialOutcome out;
                    try {
                        if (cfg.method == Method::ThreeBB) {
                            AttemptFn attempt = [&](const ThreeBasisSet& b,
                                                    int att) -> std::optional<EstimationReport> {
                                std::uint64_t s = att == 0
                                                      ? tseed
                                                      : derive_seed(tseed, {10u, static_cast<std::uint64_t>(att)});
                                return estimate_3bb(simulate_counts_3bb(truth, b, shots, s), b);
                            };
                            EstimationReport rep;
                            if (cfg.retries > 0) {
                                RetryPolicy policy;
                                policy.max_retries = cfg.retries;
                                rep = estimate_3bb_with_retry(
                                    d, bases, attempt,
                                    derive_seed(cfg.seed, {3u, static_cast<std::uint64_t>(d),
                                                           static_cast<std::uint64_t>(shots),
                                                           static_cast<std::uint64_t>(j),
                                                           static_cast<std::uint64_t>(i)}),
                                    policy);
                            } else {
                                rep = *attempt(bases, 0);
                            }
                            out.infid = infidelity(truth, rep.estimate);
                            out.omega = omega_f_flag(rep, truth, omega_tol);
                        } else {
                            PureState est = estimate_5bb(
                                simulate_counts_5bb(truth, bases.params, shots, tseed), bases.params);
                            out.infid = infidelity(truth, est);
                        }
                    } catch (const AmbiguousSupport&) {
                        out.failed = true;
                    }
                    if (out.failed) {
                        ++row.failures;
                        continue;
                    }
                    state_acc += out.infid;
                    ++state_ok;
                    if (out.omega) {
                        omega_sum += out.infid;
                        ++omega_count;
                    } else {
                        comp_sum += out.infid;
                        ++comp_count;
                    }
                }
                if (state_ok > 0) state_means.push_back(state_acc / state_ok);
            }

            if (!state_means.empty()) {
                Stats s = aggregate_stats(state_means);
                row.mean = s.mean;
                row.median = s.median;
                row.q25 = s.q25;
                row.q75 = s.q75;
            }
            const std::int64_t all_trials =
                static_cast<std::int64_t>(cfg.states) * static_cast<std::int64_t>(cfg.trials);
            row.omega_f_fraction = static_cast<double>(omega_count) / static_cast<double>(all_trials);
            row.omega_f_mean = omega_count > 0 ? omega_sum / static_cast<double>(omega_count) : 0.0;
            row.complement_mean = comp_count > 0 ? comp_sum / static_cast<double>(comp_count) : 0.0;
            rows.push_back(row);
            if (progress) {
                *progress << "sweep d=" << d << " N=" << shots << " mean=" << row.mean
                          << " failures=" << row.failures << "\n";
            }
        }
    }
    return rows;
}

}  // namespace pstomo
