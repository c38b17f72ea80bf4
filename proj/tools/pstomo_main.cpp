// Command-line front end: simulate, reconstruct (from a counts file),
// sweep, and an oracle self-check of the correlator formulas.
//
// Exit codes: 0 ok, 1 invalid configuration, 2 schema error,
// 3 ambiguous support, 4 retries exhausted, 5 oracle failure.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pstomo/errors.hpp"
#include "pstomo/io.hpp"
#include "pstomo/measure.hpp"
#include "pstomo/metrics.hpp"
#include "pstomo/reconstruct.hpp"
#include "pstomo/rng.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSchema = 2;
constexpr int kExitAmbiguous = 3;
constexpr int kExitRetries = 4;
constexpr int kExitOracle = 5;

struct SimulateArgs {
    int dim = 0;
    std::int64_t shots = 0;
    std::uint64_t seed = 0;
    std::string method = "3bb";
    std::string state = "haar";
    double a = -1.0;
    double b = -1.0;
    std::string phases;
    int retries = 3;
    std::string output;
    std::string counts_out;
};

struct ReconstructArgs {
    std::string input;
    std::string output;
};

struct SweepArgs {
    std::string input;
    std::string output;
};

struct OracleArgs {
    int dim = 8;
    int trials = 1000;
    std::uint64_t seed = 0;
};

std::string flags_summary(const pstomo::ReportFlags& f) {
    std::string s;
    if (f.equal_pairs_detected) s += " equal_pairs";
    if (f.likelihood_tie) s += " likelihood_tie";
    if (f.retries_exhausted) s += " retries_exhausted";
    if (!f.clamped_k.empty()) s += " clamped(" + std::to_string(f.clamped_k.size()) + ")";
    return s.empty() ? " none" : s;
}

pstomo::PairBasisParams resolve_params(int d, const SimulateArgs& args) {
    pstomo::PairBasisParams params = pstomo::default_params(d);
    if (args.a > 0.0 && args.b > 0.0) {
        params.a = args.a;
        params.b = args.b;
    } else if (args.a > 0.0) {
        params.a = args.a;
        params.b = std::sqrt(1.0 - args.a * args.a);
    } else if (args.b > 0.0) {
        params.b = args.b;
        params.a = std::sqrt(1.0 - args.b * args.b);
    }
    if (!args.phases.empty()) {
        std::vector<pstomo::cx> vals = pstomo::io::parse_state_literal(args.phases);
        params.phases.clear();
        for (const pstomo::cx& v : vals) {
            if (v.imag() != 0.0) throw pstomo::InvalidParams("--phases entries must be real");
            params.phases.push_back(v.real());
        }
        if (static_cast<int>(params.phases.size()) != d / 2) {
            throw pstomo::InvalidParams("--phases needs exactly d/2 angles");
        }
    }
    return params;
}

int run_simulate(const SimulateArgs& args) {
    if (args.shots < 1) throw pstomo::InvalidParams("--shots must be >= 1");
    if (args.retries < 0) throw pstomo::InvalidParams("--retries must be >= 0");
    if (args.method != "3bb" && args.method != "5bb") {
        throw pstomo::InvalidParams("--method must be 3bb or 5bb");
    }

    pstomo::PureState truth =
        (args.state == "haar")
            ? pstomo::haar_random(args.dim, pstomo::derive_seed(args.seed, {1u}))
            : pstomo::make_state(pstomo::io::parse_state_literal(args.state));
    const int d = truth.dim();
    if (args.state != "haar" && args.dim != 0 && args.dim != d) {
        throw pstomo::InvalidParams("--dim disagrees with the --state literal");
    }
    pstomo::PairBasisParams params = resolve_params(d, args);

    if (args.method == "5bb") {
        if (!args.counts_out.empty()) {
            throw pstomo::InvalidParams("--counts-out is only available for the 3bb method");
        }
        auto records = pstomo::simulate_counts_5bb(truth, params, args.shots,
                                                   pstomo::derive_seed(args.seed, {2u, 0u}));
        pstomo::PureState est = pstomo::estimate_5bb(records, params);
        double infid = pstomo::infidelity(truth, est);
        std::printf("method=5bb d=%d N=%" PRId64 " seed=%" PRIu64 " infidelity=%.6g\n", d,
                    args.shots, args.seed, infid);
        if (!args.output.empty()) {
            pstomo::io::json out{{"method", "5bb"},
                                 {"dimension", d},
                                 {"estimate", pstomo::io::json::array()},
                                 {"truth_infidelity", infid}};
            for (const pstomo::cx& c : est.amps) {
                out["estimate"].push_back({c.real(), c.imag()});
            }
            pstomo::io::write_text_file(args.output, out.dump(2) + "\n");
        }
        return kExitOk;
    }

    pstomo::ThreeBasisSet bases = pstomo::three_bases(d, params);
    auto initial = pstomo::simulate_counts_3bb(truth, bases, args.shots,
                                               pstomo::derive_seed(args.seed, {2u, 0u}));
    if (!args.counts_out.empty()) {
        pstomo::io::CountsFile file{d, params, initial};
        pstomo::io::write_text_file(args.counts_out,
                                    pstomo::io::counts_file_to_json(file).dump(2) + "\n");
    }

    pstomo::AttemptFn attempt = [&](const pstomo::ThreeBasisSet& b,
                                    int att) -> std::optional<pstomo::EstimationReport> {
        if (att == 0) return pstomo::estimate_3bb(initial, b);
        auto records = pstomo::simulate_counts_3bb(
            truth, b, args.shots,
            pstomo::derive_seed(args.seed, {2u, static_cast<std::uint64_t>(att)}));
        return pstomo::estimate_3bb(records, b);
    };

    pstomo::EstimationReport report;
    if (args.retries > 0) {
        pstomo::RetryPolicy policy;
        policy.max_retries = args.retries;
        report = pstomo::estimate_3bb_with_retry(d, bases, attempt,
                                                 pstomo::derive_seed(args.seed, {3u}), policy);
    } else {
        report = *attempt(bases, 0);
    }
    double infid = pstomo::infidelity(truth, report.estimate);
    std::printf("method=3bb d=%d N=%" PRId64 " seed=%" PRIu64
                " infidelity=%.6g retries=%d flags:%s\n",
                d, args.shots, args.seed, infid, report.retries,
                flags_summary(report.flags).c_str());
    if (!args.output.empty()) {
        pstomo::io::write_text_file(args.output,
                                    pstomo::io::report_to_json(report, infid).dump(2) + "\n");
    }
    return report.flags.retries_exhausted ? kExitRetries : kExitOk;
}

int run_reconstruct(const ReconstructArgs& args) {
    pstomo::io::CountsFile file =
        pstomo::io::counts_file_from_json(pstomo::io::read_json_file(args.input));
    pstomo::ThreeBasisSet bases = pstomo::three_bases(file.dimension, file.params);
    pstomo::EstimationReport report = pstomo::estimate_3bb(file.records, bases);
    std::printf("reconstruct d=%d N=%" PRId64 " flags:%s\n", file.dimension,
                file.records[0].shots, flags_summary(report.flags).c_str());
    for (int k = 0; k < report.estimate.dim(); ++k) {
        std::printf("  c[%d] = %+.9f %+.9fi\n", k, report.estimate[k].real(),
                    report.estimate[k].imag());
    }
    if (!args.output.empty()) {
        pstomo::io::write_text_file(args.output,
                                    pstomo::io::report_to_json(report).dump(2) + "\n");
    }
    return kExitOk;
}

int run_sweep(const SweepArgs& args) {
    pstomo::SweepConfig cfg =
        pstomo::io::sweep_config_from_json(pstomo::io::read_json_file(args.input));
    std::vector<pstomo::SweepRow> rows = pstomo::run_sweep(cfg, &std::cerr);
    pstomo::io::write_text_file(args.output, pstomo::io::sweep_csv(rows));
    return kExitOk;
}

int run_oracle_check(const OracleArgs& args) {
    if (args.trials < 1) throw pstomo::InvalidParams("--trials must be >= 1");
    double max_dre = 0.0, max_dim = 0.0, max_3bb = 0.0, max_5bb = 0.0;
    int degenerate = 0;
    for (int t = 0; t < args.trials; ++t) {
        pstomo::PureState truth = pstomo::haar_random(
            args.dim, pstomo::derive_seed(args.seed, {1u, static_cast<std::uint64_t>(t)}));
        pstomo::Rng pr(pstomo::derive_seed(args.seed, {2u, static_cast<std::uint64_t>(t)}));
        pstomo::PairBasisParams params = pstomo::default_params(args.dim);
        params.a = 0.3 + 0.65 * pr.uniform();
        params.b = std::sqrt(1.0 - params.a * params.a);
        pstomo::ThreeBasisSet bases = pstomo::three_bases(args.dim, params);

        auto probs = pstomo::exact_probs_3bb(truth, bases);
        const std::size_t half = static_cast<std::size_t>(args.dim / 2);
        pstomo::LambdaChain chain = pstomo::build_lambda_chain(
            probs[0].p, std::span<const double>(probs[1].p).first(half),
            std::span<const double>(probs[2].p).first(half), params);
        std::vector<pstomo::cx> lam = pstomo::pair_correlators(truth);

        double dre = 0.0, dim_err = 0.0;
        for (int k = 0; k < args.dim - 1; ++k) {
            dre = std::max(dre, std::abs(chain.re[static_cast<std::size_t>(k)] -
                                         lam[static_cast<std::size_t>(k)].real()));
            dim_err = std::max(dim_err,
                               std::abs(chain.im_mag[static_cast<std::size_t>(k)] -
                                        std::abs(lam[static_cast<std::size_t>(k)].imag())));
        }
        dre = std::max(dre, std::abs(*chain.wrap_re - lam.back().real()));

        pstomo::EstimationReport rep = pstomo::estimate_3bb_exact(probs, bases);
        double infid3 = pstomo::infidelity(truth, rep.estimate);
        bool flagged = rep.flags.likelihood_tie || rep.flags.equal_pairs_detected;
        if (flagged) ++degenerate;

        pstomo::PureState est5 =
            pstomo::estimate_5bb_exact(pstomo::exact_probs_5bb(truth, params), params);
        double infid5 = pstomo::infidelity(truth, est5);

        bool bad = dre > 1e-10 || dim_err > 1e-10 || (!flagged && infid3 > 1e-9) || infid5 > 1e-9;
        if (bad) {
            std::fprintf(stderr,
                         "oracle-check FAIL at trial %d: a=%.17g b=%.17g dRe=%.3g dIm=%.3g "
                         "infid3=%.3g infid5=%.3g\nstate:\n",
                         t, params.a, params.b, dre, dim_err, infid3, infid5);
            for (int k = 0; k < args.dim; ++k) {
                std::fprintf(stderr, "  c[%d] = %+.17g %+.17gi\n", k, truth[k].real(),
                             truth[k].imag());
            }
            return kExitOracle;
        }
        max_dre = std::max(max_dre, dre);
        max_dim = std::max(max_dim, dim_err);
        if (!flagged) max_3bb = std::max(max_3bb, infid3);
        max_5bb = std::max(max_5bb, infid5);
    }
    std::printf("oracle-check PASS trials=%d max|dRe|=%.3g max|dIm|=%.3g "
                "max_infid_3bb=%.3g max_infid_5bb=%.3g degenerate=%d\n",
                args.trials, max_dre, max_dim, max_3bb, max_5bb, degenerate);
    return kExitOk;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Pure-state tomography with three measurement bases"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "simulate measurements and estimate");
    simulate->add_option("--dim", sim.dim, "dimension (even, >= 4)");
    simulate->add_option("--shots", sim.shots, "ensemble size N per basis")->required();
    simulate->add_option("--seed", sim.seed, "master seed");
    simulate->add_option("--method", sim.method, "3bb or 5bb");
    simulate->add_option("--state", sim.state, "\"haar\" or comma-separated complex literals");
    simulate->add_option("--a", sim.a, "pair amplitude a");
    simulate->add_option("--b", sim.b, "pair amplitude b");
    simulate->add_option("--phases", sim.phases, "comma-separated completion phases");
    simulate->add_option("--retries", sim.retries, "max basis re-randomizations");
    simulate->add_option("--output", sim.output, "report JSON path");
    simulate->add_option("--counts-out", sim.counts_out, "write the sampled counts file");

    ReconstructArgs rec;
    CLI::App* reconstruct = app.add_subcommand("reconstruct", "estimate from a counts file");
    reconstruct->add_option("--input", rec.input, "counts JSON path")->required();
    reconstruct->add_option("--output", rec.output, "report JSON path");

    SweepArgs swp;
    CLI::App* sweep = app.add_subcommand("sweep", "run an accuracy sweep to CSV");
    sweep->add_option("--input", swp.input, "sweep config JSON path")->required();
    sweep->add_option("--output", swp.output, "results CSV path")->required();

    OracleArgs orc;
    CLI::App* oracle = app.add_subcommand("oracle-check", "verify correlators against amplitudes");
    oracle->add_option("--dim", orc.dim, "dimension (even, >= 4)");
    oracle->add_option("--trials", orc.trials, "number of random trials");
    oracle->add_option("--seed", orc.seed, "master seed");

    CLI11_PARSE(app, argc, argv);

    if (simulate->parsed()) {
        if (sim.state == "haar" && sim.dim == 0) {
            throw pstomo::InvalidParams("simulate: --dim is required with --state haar");
        }
        return run_simulate(sim);
    }
    if (reconstruct->parsed()) return run_reconstruct(rec);
    if (sweep->parsed()) return run_sweep(swp);
    return run_oracle_check(orc);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const pstomo::SchemaError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSchema;
    } catch (const pstomo::AmbiguousSupport& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitAmbiguous;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
}
