#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pstomo/errors.hpp"
#include "pstomo/measure.hpp"
#include "pstomo/reconstruct.hpp"
#include "pstomo/rng.hpp"

using namespace pstomo;

namespace {

const cx I{0.0, 1.0};

LambdaChain chain_from_exact(const PureState& psi, const ThreeBasisSet& bases) {
    auto probs = exact_probs_3bb(psi, bases);
    const std::size_t half = static_cast<std::size_t>(psi.dim() / 2);
    return build_lambda_chain(probs[0].p, std::span<const double>(probs[1].p).first(half),
                              std::span<const double>(probs[2].p).first(half), bases.params);
}

PairBasisParams random_params(int d, std::uint64_t seed) {
    Rng rng(seed);
    PairBasisParams p = default_params(d);
    p.a = 0.3 + 0.65 * rng.uniform();
    p.b = std::sqrt(1.0 - p.a * p.a);
    return p;
}

}  // namespace

TEST_CASE("lambda_real on hand-checked states") {
    ThreeBasisSet bases = three_bases(4, default_params(4));

    PureState flat = make_state({1, 1, 1, 1});
    LambdaChain chain = chain_from_exact(flat, bases);
    CHECK(chain.re[0] == doctest::Approx(0.5).epsilon(1e-12));

    PureState qi = make_state({1, I, 0, 0});
    chain = chain_from_exact(qi, bases);
    CHECK(std::abs(chain.re[0]) < 1e-12);
    CHECK(chain.im_mag[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lambda extraction matches the brute-force oracle") {
    for (int d : {4, 6, 8}) {
        for (int t = 0; t < 100; ++t) {
            PureState psi = haar_random(d, derive_seed(1000, {static_cast<std::uint64_t>(d),
                                                              static_cast<std::uint64_t>(t)}));
            PairBasisParams params =
                random_params(d, derive_seed(2000, {static_cast<std::uint64_t>(d),
                                                    static_cast<std::uint64_t>(t)}));
            ThreeBasisSet bases = three_bases(d, params);
            LambdaChain chain = chain_from_exact(psi, bases);
            auto lam = oracles::lambda_direct(psi);
            for (int k = 0; k < d - 1; ++k) {
                CHECK(std::abs(chain.re[static_cast<std::size_t>(k)] -
                               lam[static_cast<std::size_t>(k)].real()) < 1e-10);
                CHECK(std::abs(chain.im_mag[static_cast<std::size_t>(k)] -
                               std::abs(lam[static_cast<std::size_t>(k)].imag())) < 1e-10);
            }
            REQUIRE(chain.wrap_re.has_value());
            CHECK(std::abs(*chain.wrap_re - lam.back().real()) < 1e-10);
        }
    }
}

TEST_CASE("the printed closed form is mis-scaled, the corrected one is not") {
    // Negative control: the uncorrected difference form Re = (p+ - p-)/(ab)
    // disagrees with 2 c_k conj(c_{k+1}) once a != b (and by a factor of 2
    // even at a = b); the corrected extraction always matches.
    double worst_literal = 0.0;
    for (int t = 0; t < 100; ++t) {
        PureState psi = haar_random(4, derive_seed(3000, {static_cast<std::uint64_t>(t)}));
        PairBasisParams params = random_params(4, derive_seed(3001, {static_cast<std::uint64_t>(t)}));
        auto probs = exact_probs_5bb(psi, params);
        auto lam = oracles::lambda_direct(psi);
        double literal_re = (probs[1].p[0] - probs[1].p[1]) / (params.a * params.b);
        worst_literal = std::max(worst_literal, std::abs(literal_re - lam[0].real()));

        ThreeBasisSet bases = three_bases(4, params);
        LambdaChain chain = chain_from_exact(psi, bases);
        CHECK(std::abs(chain.re[0] - lam[0].real()) < 1e-10);
    }
    CHECK(worst_literal > 1e-3);
}

TEST_CASE("lambda_imag_magnitude") {
    bool clamped = false;
    CHECK(lambda_imag_magnitude(0.5, 0.25, 0.25, &clamped) == 0.0);
    CHECK_FALSE(clamped);
    CHECK(lambda_imag_magnitude(0.0, 0.25, 0.25, &clamped) == doctest::Approx(0.5));
    CHECK_FALSE(clamped);
    // radicand -0.01: clamp to zero and flag
    CHECK(lambda_imag_magnitude(0.1, 0.0, 0.0, &clamped) == 0.0);
    CHECK(clamped);
}

TEST_CASE("enumerate_candidates counts and contents") {
    ThreeBasisSet bases = three_bases(4, default_params(4));
    PureState psi = haar_random(4, 99);
    auto probs = exact_probs_3bb(psi, bases);
    auto cands = enumerate_candidates(chain_from_exact(psi, bases), probs[0].p, 1e-6);
    CHECK(cands.size() == 8);

    PureState qi = make_state({1, I, 0, 0});
    auto probs_qi = exact_probs_3bb(qi, bases);
    auto cands_qi = enumerate_candidates(chain_from_exact(qi, bases), probs_qi[0].p, 1e-6);
    CHECK(cands_qi.size() == 8);
    PureState conj_qi = make_state({1, -I, 0, 0});
    bool has_plus = false, has_minus = false;
    for (const Candidate& c : cands_qi) {
        if (infidelity(c.state, qi) < 1e-12) has_plus = true;
        if (infidelity(c.state, conj_qi) < 1e-12) has_minus = true;
    }
    CHECK(has_plus);
    CHECK(has_minus);

    // all-real chain: every candidate is the same state
    PureState alternating = make_state({1, -1, 1, -1, 1, -1, 1, -1});
    ThreeBasisSet bases8 = three_bases(8, default_params(8));
    auto probs8 = exact_probs_3bb(alternating, bases8);
    LambdaChain chain8 = chain_from_exact(alternating, bases8);
    for (int k = 0; k < 7; ++k) {
        CHECK(chain8.re[static_cast<std::size_t>(k)] == doctest::Approx(-0.25).epsilon(1e-10));
        CHECK(chain8.im_mag[static_cast<std::size_t>(k)] < 1e-6);
    }
    auto cands8 = enumerate_candidates(chain8, probs8[0].p, 1e-6);
    CHECK(cands8.size() == 128);
    for (const Candidate& c : cands8) {
        CHECK(infidelity(c.state, cands8[0].state) < 1e-12);
    }
}

TEST_CASE("enumeration is capped") {
    LambdaChain chain;
    chain.dim = 26;
    chain.re.assign(25, 0.0);
    chain.im_mag.assign(25, 0.1);
    std::vector<double> q(26, 1.0 / 26);
    CHECK_THROWS_AS(enumerate_candidates(chain, q, 1e-6), EnumerationTooLarge);
}

TEST_CASE("candidates reproduce the probabilities they were built from") {
    for (int d : {4, 6}) {
        ThreeBasisSet bases = three_bases(d, default_params(d));
        for (int t = 0; t < 25; ++t) {
            PureState psi = haar_random(d, derive_seed(4000, {static_cast<std::uint64_t>(d),
                                                              static_cast<std::uint64_t>(t)}));
            auto probs = exact_probs_3bb(psi, bases);
            auto cands = enumerate_candidates(chain_from_exact(psi, bases), probs[0].p, 1e-6);
            CHECK(cands.size() == (std::size_t{1} << (d - 1)));
            for (const Candidate& c : cands) {
                auto canon = exact_probs(c.state, bases.canonical);
                for (int j = 0; j < d; ++j) {
                    CHECK(std::abs(canon.p[static_cast<std::size_t>(j)] -
                                   probs[0].p[static_cast<std::size_t>(j)]) < 1e-9);
                }
                // pair-plus outcomes for the d-1 chain links (the wraparound
                // pair is genuinely candidate-dependent)
                auto p1 = exact_probs(c.state, bases.b1p);
                auto p3 = exact_probs(c.state, bases.b3p);
                for (int v = 0; v < d / 2; ++v) {
                    CHECK(std::abs(p1.p[static_cast<std::size_t>(v)] -
                                   probs[1].p[static_cast<std::size_t>(v)]) < 1e-9);
                }
                for (int v = 0; v + 1 < d / 2; ++v) {
                    CHECK(std::abs(p3.p[static_cast<std::size_t>(v)] -
                                   probs[2].p[static_cast<std::size_t>(v)]) < 1e-9);
                }
            }
        }
    }
}

TEST_CASE("log_likelihood floor keeps orthogonal candidates finite") {
    ThreeBasisSet bases = three_bases(4, default_params(4));
    // the flat state sits entirely in the pair-plus span: every completion
    // probability is zero, so a positive completion weight hits the floor
    PureState flat = make_state({1, 1, 1, 1});
    std::vector<double> w1{0, 0, 1, 0};  // one completion count on B1p
    std::vector<double> w3{0, 0, 0, 0};
    double ll = log_likelihood(flat, bases, w1, w3);
    CHECK(ll == doctest::Approx(std::log(1e-12)));
    CHECK(std::isfinite(ll));
}

TEST_CASE("the true-sign candidate attains the likelihood maximum on exact data") {
    for (int t = 0; t < 50; ++t) {
        const int d = 6;
        PureState psi = haar_random(d, derive_seed(5000, {static_cast<std::uint64_t>(t)}));
        ThreeBasisSet bases = three_bases(d, default_params(d));
        auto probs = exact_probs_3bb(psi, bases);
        auto cands = enumerate_candidates(chain_from_exact(psi, bases), probs[0].p, 1e-6);
        double best_ll = -1e300;
        std::size_t best = 0;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            double ll = log_likelihood(cands[i].state, bases, probs[1].p, probs[2].p);
            if (ll > best_ll) {
                best_ll = ll;
                best = i;
            }
        }
        CHECK(infidelity(cands[best].state, psi) < 1e-9);
    }
}

TEST_CASE("estimate_3bb recovers Haar states from exact probabilities") {
    for (int d : {4, 8}) {
        ThreeBasisSet bases = three_bases(d, default_params(d));
        for (int t = 0; t < 100; ++t) {
            PureState psi = haar_random(d, derive_seed(6000, {static_cast<std::uint64_t>(d),
                                                              static_cast<std::uint64_t>(t)}));
            EstimationReport rep = estimate_3bb_exact(exact_probs_3bb(psi, bases), bases);
            CHECK(infidelity(psi, rep.estimate) < 1e-9);
            CHECK_FALSE(rep.flags.likelihood_tie);
            CHECK(rep.loglik_ranking.size() == (std::size_t{1} << (d - 1)));
            CHECK(rep.loglik_ranking.front() >= rep.loglik_ranking.back());
        }
    }
}

TEST_CASE("the alternating-sign state is harmlessly degenerate") {
    PureState psi = make_state({1, -1, 1, -1, 1, -1, 1, -1});
    ThreeBasisSet bases = three_bases(8, default_params(8));
    EstimationReport rep = estimate_3bb_exact(exact_probs_3bb(psi, bases), bases);
    CHECK(infidelity(psi, rep.estimate) < 1e-12);
    CHECK(rep.flags.equal_pairs_detected);  // all canonical outcomes equal 1/8
    CHECK_FALSE(rep.flags.likelihood_tie);  // every candidate is the same state
}

TEST_CASE("ambiguous support raises") {
    PureState psi = make_state({1, 0, 1, 0});
    ThreeBasisSet bases = three_bases(4, default_params(4));
    CHECK_THROWS_AS(estimate_3bb_exact(exact_probs_3bb(psi, bases), bases), AmbiguousSupport);
}

TEST_CASE("single-arc zero patterns chain through the wraparound link") {
    // support {2..7, 0} wraps across the d-1/0 boundary; the chain re-routes
    // through the measured (d-1, 0) correlator
    const int d = 8;
    Rng rng(66);
    std::vector<cx> amps(static_cast<std::size_t>(d));
    for (cx& c : amps) c = rng.complex_normal();
    amps[1] = 0.0;
    PureState psi = make_state(std::move(amps));
    ThreeBasisSet bases = three_bases(d, default_params(d));
    EstimationReport rep = estimate_3bb_exact(exact_probs_3bb(psi, bases), bases);
    CHECK(infidelity(psi, rep.estimate) < 1e-9);
}

TEST_CASE("a crafted record with no discriminating counts ties") {
    ThreeBasisSet bases = three_bases(4, default_params(4));
    std::array<CountRecord, 3> records{
        CountRecord{"B0", {40, 10, 40, 10}, 100},
        CountRecord{"B1p", {40, 60, 0, 0}, 100},
        CountRecord{"B3p", {50, 0, 0, 0}, 50},
    };
    EstimationReport rep = estimate_3bb(records, bases);
    CHECK(rep.flags.likelihood_tie);
    CHECK(rep.loglik_ranking.front() == 0.0);
    CHECK(rep.loglik_ranking.back() == 0.0);
}

TEST_CASE("estimate_5bb recovers Haar states and the +i branch") {
    for (int d : {4, 8}) {
        for (int t = 0; t < 100; ++t) {
            PureState psi = haar_random(d, derive_seed(7000, {static_cast<std::uint64_t>(d),
                                                              static_cast<std::uint64_t>(t)}));
            PairBasisParams params =
                random_params(d, derive_seed(7001, {static_cast<std::uint64_t>(d),
                                                    static_cast<std::uint64_t>(t)}));
            PureState est = estimate_5bb_exact(exact_probs_5bb(psi, params), params);
            CHECK(infidelity(psi, est) < 1e-9);
        }
    }

    PureState qi = make_state({1, I, 0, 0});
    PairBasisParams params = default_params(4);
    PureState est = estimate_5bb_exact(exact_probs_5bb(qi, params), params);
    CHECK(infidelity(qi, est) < 1e-12);
    CHECK(est[1].imag() > 0.5);  // the +i branch, not the conjugate
}

TEST_CASE("at a = b the 5bb extraction is the plain frequency difference") {
    // literal Eq-3-style estimator: no 1/(2ab) factor, no asymmetry term
    auto literal_5bb = [](const std::array<ProbabilityVector, 5>& probs) {
        const int d = static_cast<int>(probs[0].p.size());
        std::vector<double> re(static_cast<std::size_t>(d)), im(static_cast<std::size_t>(d));
        for (int k = 0; k < d; ++k) {
            const int v = k / 2;
            const auto& fre = (k % 2 == 0) ? probs[1].p : probs[3].p;
            const auto& fim = (k % 2 == 0) ? probs[2].p : probs[4].p;
            re[static_cast<std::size_t>(k)] = fre[static_cast<std::size_t>(2 * v)] -
                                              fre[static_cast<std::size_t>(2 * v + 1)];
            im[static_cast<std::size_t>(k)] = fim[static_cast<std::size_t>(2 * v + 1)] -
                                              fim[static_cast<std::size_t>(2 * v)];
        }
        std::vector<cx> amps(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) amps[static_cast<std::size_t>(j)] = std::sqrt(probs[0].p[static_cast<std::size_t>(j)]);
        double theta = 0.0;
        for (int k = 0; k + 1 < d; ++k) {
            theta -= std::atan2(im[static_cast<std::size_t>(k)], re[static_cast<std::size_t>(k)]);
            amps[static_cast<std::size_t>(k + 1)] =
                std::abs(amps[static_cast<std::size_t>(k + 1)]) * cx(std::cos(theta), std::sin(theta));
        }
        return make_state(std::move(amps));
    };

    PairBasisParams params = default_params(6);
    for (int t = 0; t < 20; ++t) {
        PureState psi = haar_random(6, derive_seed(7100, {static_cast<std::uint64_t>(t)}));
        auto probs = exact_probs_5bb(psi, params);
        PureState lib = estimate_5bb_exact(probs, params);
        PureState lit = literal_5bb(probs);
        CHECK(infidelity(lib, lit) < 1e-12);
    }
}

TEST_CASE("3bb and 5bb agree on exact probabilities") {
    for (int d : {4, 8}) {
        ThreeBasisSet bases = three_bases(d, default_params(d));
        for (int t = 0; t < 50; ++t) {
            PureState psi = haar_random(d, derive_seed(7200, {static_cast<std::uint64_t>(d),
                                                              static_cast<std::uint64_t>(t)}));
            EstimationReport rep = estimate_3bb_exact(exact_probs_3bb(psi, bases), bases);
            PureState est5 = estimate_5bb_exact(exact_probs_5bb(psi, bases.params), bases.params);
            CHECK(infidelity(rep.estimate, est5) < 1e-9);
        }
    }
}

TEST_CASE("conjugating the state flips the candidate set, with zeroed phases") {
    const int d = 4;
    PairBasisParams params = default_params(d);
    params.phases.assign(2, 0.0);  // real completion vectors
    ThreeBasisSet bases = three_bases(d, params);

    PureState psi = haar_random(d, 123);
    PureState conj = oracles::conj_state(psi);

    // canonical and pair-plus probabilities cannot tell them apart
    auto pa = exact_probs_3bb(psi, bases);
    auto pb = exact_probs_3bb(conj, bases);
    for (int r = 0; r < 3; ++r) {
        for (std::size_t j = 0; j < pa[static_cast<std::size_t>(r)].p.size(); ++j) {
            CHECK(pa[static_cast<std::size_t>(r)].p[j] ==
                  doctest::Approx(pb[static_cast<std::size_t>(r)].p[j]).epsilon(1e-10));
        }
    }

    // the candidate set is closed under conjugation: flipping every sign
    // bit conjugates the state
    auto cands = enumerate_candidates(chain_from_exact(psi, bases), pa[0].p, 1e-6);
    const std::uint64_t mask = (1u << (d - 1)) - 1;
    for (std::uint64_t w = 0; w <= mask; ++w) {
        PureState manual = oracles::conj_state(cands[w].state);
        CHECK(infidelity(manual, cands[mask ^ w].state) < 1e-12);
    }
}

TEST_CASE("scaling all counts by an integer leaves the argmax unchanged") {
    PureState psi = haar_random(4, 5150);
    ThreeBasisSet bases = three_bases(4, default_params(4));
    auto records = simulate_counts_3bb(psi, bases, 1000, 8);
    EstimationReport rep1 = estimate_3bb(records, bases);
    for (auto& rec : records) {
        for (auto& c : rec.counts) c *= 7;
        rec.shots *= 7;
    }
    EstimationReport rep2 = estimate_3bb(records, bases);
    CHECK(rep1.chosen_signs == rep2.chosen_signs);
    CHECK(infidelity(rep1.estimate, rep2.estimate) < 1e-15);
}

TEST_CASE("estimates are gauge invariant") {
    PureState psi = haar_random(6, 31);
    std::vector<cx> rotated;
    for (const cx& c : psi.amps) rotated.push_back(c * std::exp(I * 1.234));
    PureState psi_rot{rotated};  // deliberately not re-gauged
    ThreeBasisSet bases = three_bases(6, default_params(6));
    EstimationReport r1 = estimate_3bb_exact(exact_probs_3bb(psi, bases), bases);
    EstimationReport r2 = estimate_3bb_exact(exact_probs_3bb(psi_rot, bases), bases);
    CHECK(infidelity(r1.estimate, r2.estimate) < 1e-12);
}

TEST_CASE("retry re-randomizes on degenerate flags and recovers the flat state") {
    for (int d : {4, 8}) {
        std::vector<cx> ones(static_cast<std::size_t>(d), 1.0);
        PureState uniform = make_state(std::move(ones));
        ThreeBasisSet initial = three_bases(d, default_params(d));
        AttemptFn attempt = [&](const ThreeBasisSet& b, int) -> std::optional<EstimationReport> {
            return estimate_3bb_exact(exact_probs_3bb(uniform, b), b);
        };
        EstimationReport rep = estimate_3bb_with_retry(d, initial, attempt, 99);
        CHECK(infidelity(uniform, rep.estimate) < 1e-9);
        CHECK(rep.retries >= 1);  // equal canonical pairs keep triggering
        CHECK(rep.flags.retries_exhausted);
    }
}

TEST_CASE("retry is a no-op for a generic state") {
    PureState psi = haar_random(4, 808);
    ThreeBasisSet initial = three_bases(4, default_params(4));
    AttemptFn attempt = [&](const ThreeBasisSet& b, int) -> std::optional<EstimationReport> {
        return estimate_3bb_exact(exact_probs_3bb(psi, b), b);
    };
    EstimationReport rep = estimate_3bb_with_retry(4, initial, attempt, 99);
    CHECK(rep.retries == 0);
    CHECK_FALSE(rep.flags.retries_exhausted);
    CHECK(infidelity(psi, rep.estimate) < 1e-9);
}

TEST_CASE("retry on a non-remeasurable source exhausts immediately") {
    ThreeBasisSet bases = three_bases(4, default_params(4));
    std::array<CountRecord, 3> records{
        CountRecord{"B0", {40, 10, 40, 10}, 100},
        CountRecord{"B1p", {40, 60, 0, 0}, 100},
        CountRecord{"B3p", {50, 0, 0, 0}, 50},
    };
    AttemptFn attempt = [&](const ThreeBasisSet& b, int att) -> std::optional<EstimationReport> {
        if (att > 0) return std::nullopt;  // counts came from a file
        return estimate_3bb(records, b);
    };
    EstimationReport rep = estimate_3bb_with_retry(4, bases, attempt, 99);
    CHECK(rep.flags.retries_exhausted);
    CHECK(rep.retries == 0);
    CHECK(rep.flags.likelihood_tie);
}
