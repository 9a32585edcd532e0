#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "catalog.hpp"
#include "math_util.hpp"
#include "mcmc.hpp"
#include "parallel.hpp"
#include "series.hpp"
#include "truncation.hpp"

// Conway-Maxwell-Poisson model in the (mu, nu) parameterization whose
// normalizer Z~(mu, nu) = sum_n (mu^n/n!)^nu is an infinite series: the
// log-likelihood truncates it adaptively, and the sampler is a random-walk
// Metropolis on (log mu, log nu) that re-truncates at every proposal (the
// "noisy MCMC" regime; truncation is deterministic, so evaluating the same
// point twice yields bitwise-identical acceptance ratios).
namespace sumtrunc {

struct CompLoglik {
    double value = 0.0;
    std::uint64_t truncation_n = 0;
    bool converged = false;
};

inline CompLoglik comp_log_likelihood(std::span<const std::uint64_t> counts, double mu, double nu,
                                      const TruncationConfig& config = {}) {
    if (counts.empty()) throw config_error("comp_log_likelihood: no observations");
    if (!(mu > 0.0) || !(nu > 0.0)) {
        throw config_error("comp_log_likelihood: mu and nu must be > 0");
    }
    const TruncationResult norm =
        truncate(make_series("comp_reparam", {{"mu", mu}, {"nu", nu}}), config);

    double terms = 0.0;
    for (const std::uint64_t y : counts) {
        terms += static_cast<double>(y) * std::log(mu) - log_factorial(y);
    }
    CompLoglik out;
    out.value = nu * terms - static_cast<double>(counts.size()) * norm.log_sum.log();
    out.truncation_n = norm.n_evaluations;
    out.converged = norm.converged;
    return out;
}

struct CompPosteriorConfig {
    double prior_mu_shape = 1.0;
    double prior_mu_rate = 1.0;
    double prior_nu_shape = 0.0625;
    double prior_nu_rate = 0.25;
    TruncationConfig truncation;  // defaults: auto method, epsilon = machine eps
    std::uint64_t n_chains = 4;
    std::uint64_t n_warmup = 1000;
    std::uint64_t n_samples = 1000;
    double proposal_scale_mu = 0.1;  // random-walk sd on log mu
    double proposal_scale_nu = 0.1;  // random-walk sd on log nu
    bool adapt_proposals = true;     // Robbins-Monro toward 23.4%, frozen after warmup
    std::uint64_t seed = 1;
};

struct CompDraw {
    std::uint32_t chain = 0;
    std::uint64_t iter = 0;  // retained-phase index within the chain
    double mu = 0.0;
    double nu = 0.0;
    std::uint64_t trunc_n = 0;  // term count of this iteration's proposal evaluation
};

struct CompMcmcResult {
    ParamSummary mu;
    ParamSummary nu;
    double median_truncation_n = 0.0;
    std::vector<double> acceptance_rates;  // per chain, sampling phase
    std::vector<std::string> warnings;
    std::vector<CompDraw> draws;           // retained draws, all chains
};

inline CompMcmcResult comp_noisy_metropolis(std::span<const std::uint64_t> counts,
                                            const CompPosteriorConfig& config) {
    if (counts.empty()) throw config_error("comp_noisy_metropolis: no observations");
    if (config.n_chains < 1 || config.n_samples < 4) {
        throw config_error("comp_noisy_metropolis: need >= 1 chain and >= 4 samples");
    }
    if (!(config.proposal_scale_mu > 0.0) || !(config.proposal_scale_nu > 0.0)) {
        throw config_error("comp_noisy_metropolis: proposal scales must be > 0");
    }

    // Log posterior on (u, v) = (log mu, log nu): Gamma priors plus Jacobian
    // fold into shape * u - rate * exp(u).
    const auto log_post = [&](double u, double v) {
        const CompLoglik loglik = comp_log_likelihood(counts, std::exp(u), std::exp(v),
                                                      config.truncation);
        double lp = loglik.value
            + config.prior_mu_shape * u - config.prior_mu_rate * std::exp(u)
            + config.prior_nu_shape * v - config.prior_nu_rate * std::exp(v);
        if (!loglik.converged) lp = -std::numeric_limits<double>::infinity();
        return std::pair<double, std::uint64_t>(lp, loglik.truncation_n);
    };

    double count_mean = 0.0;
    for (const std::uint64_t y : counts) count_mean += static_cast<double>(y);
    count_mean /= static_cast<double>(counts.size());
    const double u0 = std::log(std::max(count_mean, 0.1));

    const std::size_t n_chains = static_cast<std::size_t>(config.n_chains);
    ChainMatrix mu_chains(n_chains), nu_chains(n_chains);
    std::vector<std::vector<std::uint64_t>> trunc_chains(n_chains);
    std::vector<double> acceptance(n_chains, 0.0);

    parallel_for(n_chains, [&](std::size_t c) {
        std::seed_seq sseq{static_cast<std::uint32_t>(config.seed),
                           static_cast<std::uint32_t>(config.seed >> 32),
                           static_cast<std::uint32_t>(c)};
        std::mt19937 rng(sseq);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);

        double u = u0, v = 0.0;
        double lp = log_post(u, v).first;
        double scale = 1.0;  // common Robbins-Monro factor on both proposal sds
        std::uint64_t accepted = 0;

        mu_chains[c].reserve(config.n_samples);
        nu_chains[c].reserve(config.n_samples);
        trunc_chains[c].reserve(config.n_samples);

        const std::uint64_t total = config.n_warmup + config.n_samples;
        for (std::uint64_t i = 0; i < total; ++i) {
            const double u_prop = u + scale * config.proposal_scale_mu * normal(rng);
            const double v_prop = v + scale * config.proposal_scale_nu * normal(rng);
            const auto [lp_prop, trunc_n] = log_post(u_prop, v_prop);
            const double log_alpha = lp_prop - lp;
            const double alpha = std::isnan(log_alpha) ? 0.0 : std::min(1.0, std::exp(log_alpha));
            const bool warming = i < config.n_warmup;
            if (unif(rng) < alpha) {
                u = u_prop;
                v = v_prop;
                lp = lp_prop;
                if (!warming) ++accepted;
            }
            if (warming && config.adapt_proposals) {
                const double gamma = std::pow(static_cast<double>(i) + 1.0, -0.6);
                scale *= std::exp(gamma * (alpha - 0.234));
            }
            if (!warming) {
                mu_chains[c].push_back(std::exp(u));
                nu_chains[c].push_back(std::exp(v));
                trunc_chains[c].push_back(trunc_n);
            }
        }
        acceptance[c] = static_cast<double>(accepted) / static_cast<double>(config.n_samples);
    });

    CompMcmcResult result;
    result.mu = summarize_parameter("mu", mu_chains);
    result.nu = summarize_parameter("nu", nu_chains);
    result.acceptance_rates = acceptance;

    std::vector<double> all_trunc;
    for (std::size_t c = 0; c < n_chains; ++c) {
        for (std::uint64_t i = 0; i < config.n_samples; ++i) {
            result.draws.push_back(CompDraw{static_cast<std::uint32_t>(c), i,
                                            mu_chains[c][i], nu_chains[c][i],
                                            trunc_chains[c][i]});
            all_trunc.push_back(static_cast<double>(trunc_chains[c][i]));
        }
        if (acceptance[c] < 0.01) {
            result.warnings.push_back("chain " + std::to_string(c)
                                      + " acceptance rate below 1%; chain is effectively stuck");
        }
    }
    result.median_truncation_n = quantile_type7(all_trunc, 0.5);
    return result;
}

}  // namespace sumtrunc
