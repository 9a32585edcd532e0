// Command-line front end for the series-truncation library.
//
// Subcommands:
//   sum        evaluate one catalog series under one truncation method
//   bench      run a benchmark suite, emitting one CSV row per grid cell
//   batchsize  minimum guaranteed batch size N for given ratio limits L
//   mcmc       noisy random-walk Metropolis for the COMP count model
//   mmle       marginal maximum likelihood for the cluster-duration model
//
// Every subcommand accepts --config <file.json>; command-line flags override
// config-file values.  All floating-point output uses 17 significant digits.
// Exit codes: 0 success, 1 configuration/usage error, 2 numerical cap-out.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <sumtrunc/sumtrunc.hpp>

namespace {

using nlohmann::json;

std::string fmt(double value) { return sumtrunc::csv_format_double(value); }

// JSON config files: a flat object whose keys are long option names (without
// leading dashes).  Values may be numbers, strings, booleans, or arrays.
// CLI11 only reads config files attached to the root command, so the file is
// located by scanning argv and its values are fed into the subcommand's
// options before parsing; keys also given explicitly on the command line are
// skipped, which is what makes explicit flags take precedence.
std::string& config_path_slot(const CLI::App* cmd) {
    static std::map<const CLI::App*, std::string> slots;
    return slots[cmd];
}

void attach_config(CLI::App* cmd) {
    cmd->add_option("--config", config_path_slot(cmd),
                    "JSON config file; explicit flags take precedence");
}

std::string config_scalar(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    return j.dump();  // numbers and booleans round-trip exactly
}

void apply_json_config(CLI::App& app, int argc, char** argv) {
    const std::vector<std::string> tokens(argv + (argc > 0 ? 1 : 0), argv + argc);
    CLI::App* sub = nullptr;
    for (const std::string& token : tokens) {
        if (token.rfind('-', 0) != 0) {
            sub = app.get_subcommand_no_throw(token);
            break;
        }
    }
    if (sub == nullptr) return;

    std::string path;
    std::set<std::string> explicit_names;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string& token = tokens[i];
        if (token.rfind("--", 0) != 0) continue;
        const std::size_t eq = token.find('=');
        const std::string name =
            eq == std::string::npos ? token.substr(2) : token.substr(2, eq - 2);
        explicit_names.insert(name);
        if (name != "config") continue;
        if (eq != std::string::npos) {
            path = token.substr(eq + 1);
        } else if (i + 1 < tokens.size()) {
            path = tokens[i + 1];
        }
    }
    if (path.empty()) return;

    std::ifstream file(path);
    if (!file) throw sumtrunc::config_error("cannot open config file: " + path);
    json parsed;
    try {
        file >> parsed;
    } catch (const json::parse_error& e) {
        throw sumtrunc::config_error(std::string("JSON config: ") + e.what());
    }
    if (!parsed.is_object()) {
        throw sumtrunc::config_error("JSON config root must be an object");
    }
    for (auto it = parsed.begin(); it != parsed.end(); ++it) {
        if (it.key() == "config" || explicit_names.count(it.key()) > 0) continue;
        CLI::Option* option = sub->get_option_no_throw("--" + it.key());
        if (option == nullptr) {
            throw sumtrunc::config_error("unknown option '" + it.key()
                                         + "' in config file for subcommand '"
                                         + sub->get_name() + "'");
        }
        if (it.value().is_array()) {
            for (const json& element : it.value()) option->add_result(config_scalar(element));
        } else {
            option->add_result(config_scalar(it.value()));
        }
    }
}

sumtrunc::Method parse_method(const std::string& name) {
    if (name == "threshold") return sumtrunc::Method::SumToThreshold;
    if (name == "ebp" || name == "error_bounding_pairs") {
        return sumtrunc::Method::ErrorBoundingPairs;
    }
    if (name == "batches") return sumtrunc::Method::Batches;
    if (name == "cap" || name == "fixed_cap") return sumtrunc::Method::FixedCap;
    if (name == "auto") return sumtrunc::Method::Auto;
    throw sumtrunc::config_error("unknown method '" + name
                                 + "' (known: threshold, ebp, batches, cap, auto)");
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path, std::ios::binary);  // binary: byte-identical output everywhere
    if (!file) throw sumtrunc::config_error("cannot open output file: " + path);
    return file;
}

// ---------------------------------------------------------------------------
// sum
// ---------------------------------------------------------------------------

struct SumOptions {
    std::string series;
    std::map<std::string, double> param_values;
    std::map<std::string, CLI::Option*> param_options;
    std::string method = "auto";
    sumtrunc::TruncationConfig config;
};

void setup_sum(CLI::App& app, SumOptions& opt, int& rc) {
    CLI::App* cmd = app.add_subcommand("sum", "Evaluate one catalog series");
    attach_config(cmd);
    cmd->add_option("series", opt.series, "Catalog series id")->required();

    // One flag per catalog parameter name; only flags the user actually sets
    // are forwarded, so each series still validates its own parameter list.
    for (const sumtrunc::CatalogEntry& entry : sumtrunc::catalog()) {
        for (const sumtrunc::ParamSpec& param : entry.params) {
            if (opt.param_options.count(param.name)) continue;
            auto [it, inserted] = opt.param_values.emplace(param.name, 0.0);
            opt.param_options[param.name] =
                cmd->add_option("--" + param.name, it->second, param.description);
        }
    }

    cmd->add_option("--method", opt.method, "threshold | ebp | batches | cap | auto")
        ->default_val("auto");
    cmd->add_option("--eps", opt.config.epsilon, "Absolute tolerance")
        ->default_val(opt.config.epsilon);
    cmd->add_option("--threshold-m", opt.config.threshold_m,
                    "Ratio bound M in (0,1) for the threshold method")
        ->default_val(opt.config.threshold_m);
    cmd->add_option("--batch-size", opt.config.batch_size, "Batch size N for the batches method")
        ->default_val(opt.config.batch_size);
    cmd->add_option("--max-terms", opt.config.max_terms, "Evaluation cap for adaptive methods")
        ->default_val(opt.config.max_terms);
    cmd->add_option("--cap-k", opt.config.cap_k,
                    "Fixed-cap index K (sums K+1 terms from the first index)")
        ->default_val(opt.config.cap_k);

    cmd->callback([&opt, &rc] {
        sumtrunc::Params params;
        for (const auto& [name, option] : opt.param_options) {
            if (option->count() > 0) params[name] = opt.param_values.at(name);
        }
        opt.config.method = parse_method(opt.method);
        const sumtrunc::SeriesSpec series = sumtrunc::make_series(opt.series, params);
        const sumtrunc::TruncationResult result = sumtrunc::truncate(series, opt.config);
        std::cout << "log_sum = " << fmt(result.log_sum.log()) << '\n'
                  << "sum = " << fmt(result.log_sum.linear()) << '\n'
                  << "n_evaluations = " << result.n_evaluations << '\n'
                  << "converged = " << (result.converged ? "true" : "false") << '\n'
                  << "method = " << sumtrunc::method_name(result.method_used) << '\n';
        if (!result.converged) rc = 2;
    });
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchOptions {
    std::string suite;
    std::string out;
};

void write_bench_csv(std::ostream& os, const std::vector<sumtrunc::BenchRow>& rows) {
    sumtrunc::CsvWriter writer(os);
    writer.write_row({"suite", "series", "params", "method", "batch_n", "eps", "ratio_limit",
                      "l_gt_half", "n_evaluations", "converged", "log_sum", "sum", "abs_error",
                      "ref_error", "hit_eps", "beat_ref", "either"});
    for (const sumtrunc::BenchRow& row : rows) {
        writer.write_row({row.suite, row.series, row.params, row.method,
                          std::to_string(row.batch_n), fmt(row.epsilon), fmt(row.ratio_limit),
                          row.l_gt_half ? "1" : "0", std::to_string(row.n_evaluations),
                          row.converged ? "1" : "0", fmt(row.log_sum),
                          fmt(std::exp(row.log_sum)), fmt(row.abs_error), fmt(row.ref_error),
                          row.hit_eps ? "1" : "0", row.beat_ref ? "1" : "0",
                          row.either_ok ? "1" : "0"});
    }
}

void setup_bench(CLI::App& app, BenchOptions& opt) {
    CLI::App* cmd = app.add_subcommand("bench", "Run a benchmark suite");
    attach_config(cmd);
    cmd->add_option("suite", opt.suite,
                    "table1 | comp_batches | poisson_fact | negbin | power_geometric")
        ->required();
    cmd->add_option("--out", opt.out, "Output CSV path (default: stdout)");

    cmd->callback([&opt] {
        const std::vector<sumtrunc::BenchRow> rows = sumtrunc::run_bench_suite(opt.suite);
        std::ofstream file;
        write_bench_csv(open_output(file, opt.out), rows);
        if (!opt.out.empty()) {
            std::cout << "wrote " << rows.size() << " rows to " << opt.out << '\n';
            std::vector<std::string> methods;
            for (const sumtrunc::BenchRow& row : rows) {
                if (std::find(methods.begin(), methods.end(), row.method) == methods.end()) {
                    methods.push_back(row.method);
                }
            }
            for (const std::string& method : methods) {
                std::cout << "either_rate " << method << " = "
                          << fmt(sumtrunc::bench_either_rate(rows, method)) << '\n';
            }
        }
    });
}

// ---------------------------------------------------------------------------
// batchsize
// ---------------------------------------------------------------------------

struct BatchsizeOptions {
    std::vector<double> limits;
    std::string out;
};

void setup_batchsize(CLI::App& app, BatchsizeOptions& opt) {
    CLI::App* cmd =
        app.add_subcommand("batchsize", "Minimum guaranteed batch size N per ratio limit L");
    attach_config(cmd);
    cmd->add_option("l", opt.limits, "Ratio limits L in [0,1)")->required()->expected(-1);
    cmd->add_option("--out", opt.out, "Output CSV path (default: stdout)");

    cmd->callback([&opt] {
        // Validate the whole list before emitting anything.
        std::vector<std::uint64_t> sizes;
        sizes.reserve(opt.limits.size());
        for (const double l : opt.limits) sizes.push_back(sumtrunc::min_batch_size(l));
        std::ofstream file;
        std::ostream& os = open_output(file, opt.out);
        sumtrunc::CsvWriter writer(os);
        writer.write_row({"L", "min_batch_size"});
        for (std::size_t i = 0; i < opt.limits.size(); ++i) {
            writer.write_row({fmt(opt.limits[i]), std::to_string(sizes[i])});
        }
    });
}

// ---------------------------------------------------------------------------
// mcmc
// ---------------------------------------------------------------------------

struct McmcOptions {
    std::string data;
    std::string summary_out = "mcmc_summary.json";
    std::string draws_out = "mcmc_draws.csv";
    sumtrunc::CompPosteriorConfig config;
    std::string method = "auto";
    bool no_adapt = false;
};

json summary_to_json(const sumtrunc::ParamSummary& s) {
    return json{{"mean", s.mean},   {"median", s.median}, {"sd", s.sd},
                {"q025", s.q025},   {"q975", s.q975},     {"mcse", s.mcse},
                {"ess", s.ess},     {"rhat", s.rhat}};
}

void print_param_line(const sumtrunc::ParamSummary& s) {
    std::cout << s.name << " mean = " << fmt(s.mean) << ", median = " << fmt(s.median)
              << ", q2.5 = " << fmt(s.q025) << ", q97.5 = " << fmt(s.q975)
              << ", sd = " << fmt(s.sd) << ", mcse = " << fmt(s.mcse)
              << ", ess = " << fmt(s.ess) << ", rhat = " << fmt(s.rhat) << '\n';
}

void setup_mcmc(CLI::App& app, McmcOptions& opt) {
    CLI::App* cmd = app.add_subcommand(
        "mcmc", "Noisy random-walk Metropolis for the COMP count model");
    attach_config(cmd);
    cmd->add_option("--data", opt.data, "CSV of non-negative integer counts (single column)")
        ->required();
    cmd->add_option("--summary-out", opt.summary_out, "Summary JSON path")
        ->default_val(opt.summary_out);
    cmd->add_option("--draws-out", opt.draws_out, "Draws CSV path")->default_val(opt.draws_out);
    cmd->add_option("--chains", opt.config.n_chains, "Number of chains")
        ->default_val(opt.config.n_chains);
    cmd->add_option("--warmup", opt.config.n_warmup, "Warmup iterations per chain")
        ->default_val(opt.config.n_warmup);
    cmd->add_option("--samples", opt.config.n_samples, "Retained iterations per chain")
        ->default_val(opt.config.n_samples);
    cmd->add_option("--seed", opt.config.seed, "RNG seed")->default_val(opt.config.seed);
    cmd->add_option("--scale-mu", opt.config.proposal_scale_mu,
                    "Initial random-walk sd on log mu")
        ->default_val(opt.config.proposal_scale_mu);
    cmd->add_option("--scale-nu", opt.config.proposal_scale_nu,
                    "Initial random-walk sd on log nu")
        ->default_val(opt.config.proposal_scale_nu);
    cmd->add_flag("--no-adapt", opt.no_adapt, "Disable warmup proposal adaptation");
    cmd->add_option("--prior-mu-shape", opt.config.prior_mu_shape, "Gamma prior shape on mu")
        ->default_val(opt.config.prior_mu_shape);
    cmd->add_option("--prior-mu-rate", opt.config.prior_mu_rate, "Gamma prior rate on mu")
        ->default_val(opt.config.prior_mu_rate);
    cmd->add_option("--prior-nu-shape", opt.config.prior_nu_shape, "Gamma prior shape on nu")
        ->default_val(opt.config.prior_nu_shape);
    cmd->add_option("--prior-nu-rate", opt.config.prior_nu_rate, "Gamma prior rate on nu")
        ->default_val(opt.config.prior_nu_rate);
    cmd->add_option("--method", opt.method,
                    "Truncation method for the normalising constant (default auto)")
        ->default_val(opt.method);
    cmd->add_option("--eps", opt.config.truncation.epsilon, "Truncation tolerance")
        ->default_val(opt.config.truncation.epsilon);
    cmd->add_option("--batch-size", opt.config.truncation.batch_size, "Batch size N")
        ->default_val(opt.config.truncation.batch_size);
    cmd->add_option("--max-terms", opt.config.truncation.max_terms, "Truncation term cap")
        ->default_val(opt.config.truncation.max_terms);
    cmd->add_option("--cap-k", opt.config.truncation.cap_k, "Fixed-cap index K")
        ->default_val(opt.config.truncation.cap_k);

    cmd->callback([&opt] {
        opt.config.adapt_proposals = !opt.no_adapt;
        opt.config.truncation.method = parse_method(opt.method);
        const std::vector<std::uint64_t> counts = sumtrunc::csv_read_counts(opt.data);
        const sumtrunc::CompMcmcResult result =
            sumtrunc::comp_noisy_metropolis(counts, opt.config);

        {
            std::ofstream draws_file;
            std::ostream& os = open_output(draws_file, opt.draws_out);
            sumtrunc::CsvWriter writer(os);
            writer.write_row({"chain", "iter", "mu", "nu", "trunc_n"});
            for (const sumtrunc::CompDraw& draw : result.draws) {
                writer.write_row({std::to_string(draw.chain), std::to_string(draw.iter),
                                  fmt(draw.mu), fmt(draw.nu), std::to_string(draw.trunc_n)});
            }
        }

        json summary{{"data", opt.data},
                     {"n_observations", counts.size()},
                     {"chains", opt.config.n_chains},
                     {"warmup", opt.config.n_warmup},
                     {"samples", opt.config.n_samples},
                     {"seed", opt.config.seed},
                     {"mu", summary_to_json(result.mu)},
                     {"nu", summary_to_json(result.nu)},
                     {"median_truncation_n", result.median_truncation_n},
                     {"acceptance_rates", result.acceptance_rates},
                     {"warnings", result.warnings},
                     {"draws_csv", opt.draws_out}};
        {
            std::ofstream summary_file;
            std::ostream& os = open_output(summary_file, opt.summary_out);
            os << summary.dump(2) << '\n';
        }

        print_param_line(result.mu);
        print_param_line(result.nu);
        std::cout << "median_truncation_n = " << fmt(result.median_truncation_n) << '\n';
        for (std::size_t c = 0; c < result.acceptance_rates.size(); ++c) {
            std::cout << "acceptance_rate chain_" << c << " = "
                      << fmt(result.acceptance_rates[c]) << '\n';
        }
        for (const std::string& warning : result.warnings) {
            std::cerr << "warning: " << warning << '\n';
        }
    });
}

// ---------------------------------------------------------------------------
// mmle
// ---------------------------------------------------------------------------

struct MmleOptions {
    std::string mode;
    std::string data;
    std::string out;
    std::string representation = "full";
    std::string truncation = "adaptive";
    std::uint64_t fixed_terms = 1000;
    double eps = std::numeric_limits<double>::epsilon();
    std::uint64_t max_terms = 200000;
    double true_mu = 0.0;
    double true_beta = 0.0;
    std::uint64_t j = 50;
    std::uint64_t reps = 100;
    std::uint64_t seed = 1;
    double init_mu = 0.0;
    double init_beta = 0.0;
    CLI::Option* init_mu_opt = nullptr;
    CLI::Option* init_beta_opt = nullptr;
};

std::vector<sumtrunc::ErlangRepresentation> parse_representations(const std::string& name) {
    if (name == "full") return {sumtrunc::ErlangRepresentation::Full};
    if (name == "bessel") return {sumtrunc::ErlangRepresentation::Bessel};
    if (name == "both") {
        return {sumtrunc::ErlangRepresentation::Bessel, sumtrunc::ErlangRepresentation::Full};
    }
    throw sumtrunc::config_error("unknown representation '" + name
                                 + "' (known: full, bessel, both)");
}

std::vector<sumtrunc::ErlangTruncation> parse_truncations(const MmleOptions& opt) {
    sumtrunc::ErlangTruncation fixed = sumtrunc::ErlangTruncation::fixed(opt.fixed_terms);
    sumtrunc::ErlangTruncation adaptive = sumtrunc::ErlangTruncation::adaptive(opt.eps);
    adaptive.max_terms = opt.max_terms;
    if (opt.truncation == "fixed") return {fixed};
    if (opt.truncation == "adaptive") return {adaptive};
    if (opt.truncation == "both") return {fixed, adaptive};
    throw sumtrunc::config_error("unknown truncation '" + opt.truncation
                                 + "' (known: fixed, adaptive, both)");
}

json interval_to_json(const sumtrunc::Interval& ci) {
    return json{{"lo", ci.lo}, {"hi", ci.hi}};
}

void run_mmle_single(const MmleOptions& opt) {
    if (opt.data.empty()) {
        throw sumtrunc::config_error("mmle single requires --data");
    }
    const std::vector<sumtrunc::ErlangRepresentation> reps =
        parse_representations(opt.representation);
    const std::vector<sumtrunc::ErlangTruncation> truncs = parse_truncations(opt);
    if (reps.size() != 1 || truncs.size() != 1) {
        throw sumtrunc::config_error(
            "mmle single fits one configuration; pick one representation and one truncation");
    }
    const std::vector<double> data = sumtrunc::csv_read_reals(opt.data);
    std::optional<std::pair<double, double>> init;
    if (opt.init_mu_opt->count() > 0 || opt.init_beta_opt->count() > 0) {
        if (opt.init_mu_opt->count() == 0 || opt.init_beta_opt->count() == 0) {
            throw sumtrunc::config_error("--init-mu and --init-beta must be given together");
        }
        init = std::make_pair(opt.init_mu, opt.init_beta);
    }
    const sumtrunc::ErlangMmleResult fit =
        sumtrunc::erlang_mmle(data, reps[0], truncs[0], init);

    json out{{"n_observations", data.size()},
             {"representation", sumtrunc::representation_name(fit.representation)},
             {"truncation", sumtrunc::truncation_name(fit.truncation)},
             {"mu_hat", fit.mu_hat},
             {"beta_hat", fit.beta_hat},
             {"loglik", fit.loglik},
             {"converged", fit.converged},
             {"n_optimizer_evals", fit.n_optimizer_evals},
             {"hessian",
              {{"mumu", fit.hessian.mumu},
               {"mubeta", fit.hessian.mubeta},
               {"betabeta", fit.hessian.betabeta}}},
             {"hessian_fd",
              {{"mumu", fit.hessian_fd.mumu},
               {"mubeta", fit.hessian_fd.mubeta},
               {"betabeta", fit.hessian_fd.betabeta}}},
             {"hessian_mixed_discrepancy", fit.hessian_mixed_discrepancy},
             {"ci_mu_analytic", interval_to_json(fit.ci_mu)},
             {"ci_beta_analytic", interval_to_json(fit.ci_beta)},
             {"ci_mu_numerical", interval_to_json(fit.ci_mu_fd)},
             {"ci_beta_numerical", interval_to_json(fit.ci_beta_fd)}};
    std::ofstream file;
    std::ostream& os = open_output(file, opt.out);
    os << out.dump(2) << '\n';
    if (!opt.out.empty()) {
        std::cout << "mu_hat = " << fmt(fit.mu_hat) << '\n'
                  << "beta_hat = " << fmt(fit.beta_hat) << '\n'
                  << "converged = " << (fit.converged ? "true" : "false") << '\n';
    }
}

void run_mmle_simulate(const MmleOptions& opt) {
    if (!(opt.true_mu > 0.0) || !(opt.true_beta > 0.0)) {
        throw sumtrunc::config_error("mmle simulate requires positive --mu and --beta");
    }
    if (opt.j < 2 || opt.reps < 1) {
        throw sumtrunc::config_error("mmle simulate requires --j >= 2 and --reps >= 1");
    }
    const std::vector<sumtrunc::ErlangRepresentation> reps =
        parse_representations(opt.representation);
    const std::vector<sumtrunc::ErlangTruncation> truncs = parse_truncations(opt);

    std::ofstream file;
    std::ostream& os = open_output(file, opt.out);
    sumtrunc::CsvWriter writer(os);
    writer.write_row({"representation", "truncation", "true_mu", "true_beta", "j", "n_reps",
                      "seed", "n_converged", "rmse_mu", "rmse_beta", "coverage_mu_numerical",
                      "coverage_mu_analytic", "coverage_beta_numerical",
                      "coverage_beta_analytic"});
    for (const sumtrunc::ErlangRepresentation rep : reps) {
        for (const sumtrunc::ErlangTruncation& trunc : truncs) {
            const sumtrunc::ErlangSimulationResult sim = sumtrunc::erlang_simulate(
                opt.true_mu, opt.true_beta, opt.j, opt.reps, opt.seed, rep, trunc);
            writer.write_row({sumtrunc::representation_name(rep),
                              sumtrunc::truncation_name(trunc), fmt(opt.true_mu),
                              fmt(opt.true_beta), std::to_string(opt.j),
                              std::to_string(opt.reps), std::to_string(opt.seed),
                              std::to_string(sim.n_converged), fmt(sim.rmse_mu),
                              fmt(sim.rmse_beta), fmt(sim.coverage_mu_numerical),
                              fmt(sim.coverage_mu_analytic), fmt(sim.coverage_beta_numerical),
                              fmt(sim.coverage_beta_analytic)});
        }
    }
}

void setup_mmle(CLI::App& app, MmleOptions& opt) {
    CLI::App* cmd = app.add_subcommand(
        "mmle", "Marginal maximum likelihood for the cluster-duration model");
    attach_config(cmd);
    cmd->add_option("mode", opt.mode, "single | simulate")->required();
    cmd->add_option("--data", opt.data, "CSV of positive durations (single mode)");
    cmd->add_option("--out", opt.out, "Output path (default: stdout)");
    cmd->add_option("--representation", opt.representation, "full | bessel | both")
        ->default_val(opt.representation);
    cmd->add_option("--truncation", opt.truncation, "adaptive | fixed | both")
        ->default_val(opt.truncation);
    cmd->add_option("--fixed-terms", opt.fixed_terms, "Series terms per observation when fixed")
        ->default_val(opt.fixed_terms);
    cmd->add_option("--eps", opt.eps, "Adaptive truncation tolerance")->default_val(opt.eps);
    cmd->add_option("--max-terms", opt.max_terms, "Adaptive truncation term cap")
        ->default_val(opt.max_terms);
    cmd->add_option("--mu", opt.true_mu, "True mu (simulate mode)");
    cmd->add_option("--beta", opt.true_beta, "True beta (simulate mode)");
    cmd->add_option("--j", opt.j, "Observations per replicate (simulate mode)")
        ->default_val(opt.j);
    cmd->add_option("--reps", opt.reps, "Replicates (simulate mode)")->default_val(opt.reps);
    cmd->add_option("--seed", opt.seed, "RNG seed (simulate mode)")->default_val(opt.seed);
    opt.init_mu_opt = cmd->add_option("--init-mu", opt.init_mu, "Optimizer start for mu");
    opt.init_beta_opt = cmd->add_option("--init-beta", opt.init_beta, "Optimizer start for beta");

    cmd->callback([&opt] {
        if (opt.mode == "single") {
            run_mmle_single(opt);
        } else if (opt.mode == "simulate") {
            run_mmle_simulate(opt);
        } else {
            throw sumtrunc::config_error("unknown mmle mode '" + opt.mode
                                         + "' (known: single, simulate)");
        }
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Guaranteed-error truncation of convergent non-negative series"};
    app.require_subcommand(1);

    int rc = 0;
    SumOptions sum_options;
    BenchOptions bench_options;
    BatchsizeOptions batchsize_options;
    McmcOptions mcmc_options;
    MmleOptions mmle_options;

    setup_sum(app, sum_options, rc);
    setup_bench(app, bench_options);
    setup_batchsize(app, batchsize_options);
    setup_mcmc(app, mcmc_options);
    setup_mmle(app, mmle_options);

    try {
        apply_json_config(app, argc, argv);
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage/config problems are exit 1
    } catch (const sumtrunc::unsupported_series& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const sumtrunc::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const sumtrunc::csv_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return rc;
}
