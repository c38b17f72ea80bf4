#pragma once

// Accuracy studies: repeated-trial infidelity, wrong-sign classification,
// ensemble statistics, and the (d, N) sweep harness.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "pstomo/reconstruct.hpp"
#include "pstomo/state.hpp"

namespace pstomo {

enum class Method { ThreeBB, FiveBB };

struct SweepConfig {
    std::vector<int> dimensions;
    std::vector<std::int64_t> shots_grid;  // N per basis
    int states = 200;                      // m unknown states per (d, N)
    int trials = 20;                       // n repetitions per state
    std::uint64_t seed = 0;
    Method method = Method::ThreeBB;
    int retries = 0;  // 0 keeps the bases fixed across all trials
};

struct SweepRow {
    int d = 0;
    std::int64_t shots = 0;
    std::int64_t total_ensemble = 0;  // 3N, or 5N for the baseline
    double mean = 0.0;                // of per-state averaged infidelities
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double omega_f_fraction = 0.0;  // flagged trials / all m*n trials
    double omega_f_mean = 0.0;      // trial-level mean infidelity on the flagged set
    double complement_mean = 0.0;   // trial-level mean on completed unflagged trials
    std::int64_t failures = 0;      // trials that raised AmbiguousSupport
};

double trial_average_infidelity(const PureState& truth, std::span<const PureState> estimates);

// True iff the report picked a sign that disagrees with sign(Im(L_k)) of
// the true state on some link with |Im(L_k)| > tol. These estimates form
// the low-accuracy tail.
bool omega_f_flag(const EstimationReport& report, const PureState& truth, double tol);

struct Stats {
    double mean = 0.0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
};

// Quartiles by linear interpolation between closest ranks.
Stats aggregate_stats(std::vector<double> values);

// Rows in (d, N) order, fully reproducible per master seed. Seed streams:
// state j of dimension d uses derive_seed(seed, {1, d, j}) (the same m
// states are reused across the shots grid), trial (d, N, j, i) samples with
// derive_seed(seed, {2, d, N, j, i}), retries with tags {3, ...}.
std::vector<SweepRow> run_sweep(const SweepConfig& config, std::ostream* progress = nullptr);

}  // namespace pstomo
