#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "math_util.hpp"

// Convergence diagnostics for MCMC output: rank-normalized split R-hat and
// bulk effective sample size in the style of the modern R-hat literature
// (split chains, pooled average ranks mapped through the normal quantile,
// Geyer initial-monotone-sequence truncation for the autocorrelation time).
namespace sumtrunc {

using ChainMatrix = std::vector<std::vector<double>>;  // [chain][draw]

namespace detail {

inline void check_chains(const ChainMatrix& chains) {
    if (chains.empty()) throw std::invalid_argument("diagnostics: no chains");
    for (const auto& chain : chains) {
        if (chain.size() != chains.front().size()) {
            throw std::invalid_argument("diagnostics: chains must have equal length");
        }
        if (chain.size() < 4) {
            throw std::invalid_argument("diagnostics: chains must have at least 4 draws");
        }
    }
}

}  // namespace detail

// Each chain becomes two half-chains (the middle draw is dropped when the
// length is odd).
inline ChainMatrix split_chains(const ChainMatrix& chains) {
    detail::check_chains(chains);
    ChainMatrix halves;
    halves.reserve(2 * chains.size());
    const std::size_t half = chains.front().size() / 2;
    for (const auto& chain : chains) {
        halves.emplace_back(chain.begin(), chain.begin() + half);
        halves.emplace_back(chain.end() - half, chain.end());
    }
    return halves;
}

// Pooled average ranks (ties share the mean rank) mapped through
// probit((rank - 3/8) / (S + 1/4)).  Metropolis chains repeat values on
// rejection, so tie handling is load-bearing here.
inline ChainMatrix rank_normalize(const ChainMatrix& chains) {
    detail::check_chains(chains);
    struct Entry {
        double value;
        std::size_t chain, index;
    };
    std::vector<Entry> entries;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        for (std::size_t i = 0; i < chains[c].size(); ++i) {
            entries.push_back({chains[c][i], c, i});
        }
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.value < b.value; });

    ChainMatrix z(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c) z[c].resize(chains[c].size());
    const double total = static_cast<double>(entries.size());
    std::size_t start = 0;
    while (start < entries.size()) {
        std::size_t stop = start;
        while (stop < entries.size() && entries[stop].value == entries[start].value) ++stop;
        // 1-based ranks start+1 .. stop averaged over the tie run
        const double rank = 0.5 * (static_cast<double>(start + 1) + static_cast<double>(stop));
        const double quantile = (rank - 0.375) / (total + 0.25);
        const double value = normal_quantile(quantile);
        for (std::size_t i = start; i < stop; ++i) {
            z[entries[i].chain][entries[i].index] = value;
        }
        start = stop;
    }
    return z;
}

// Classic potential scale reduction factor on the chains as given.
inline double potential_scale_reduction(const ChainMatrix& chains) {
    detail::check_chains(chains);
    const double m = static_cast<double>(chains.size());
    const double n = static_cast<double>(chains.front().size());
    if (chains.size() < 2) throw std::invalid_argument("potential_scale_reduction: need >= 2 chains");

    std::vector<double> means, vars;
    for (const auto& chain : chains) {
        means.push_back(sample_mean(chain));
        vars.push_back(sample_variance(chain));
    }
    const double w = sample_mean(vars);
    const double b_over_n = sample_variance(means);
    if (!(w > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double var_plus = (n - 1.0) / n * w + b_over_n;
    (void)m;
    return std::sqrt(var_plus / w);
}

inline double split_rhat(const ChainMatrix& chains) {
    return potential_scale_reduction(rank_normalize(split_chains(chains)));
}

// Bulk effective sample size: Geyer initial monotone sequence on the combined
// autocorrelations of the rank-normalized split chains.
inline double bulk_ess(const ChainMatrix& chains) {
    const ChainMatrix z = rank_normalize(split_chains(chains));
    const std::size_t m = z.size();
    const std::size_t n = z.front().size();
    const double n_d = static_cast<double>(n);

    std::vector<double> means(m), vars(m);
    for (std::size_t c = 0; c < m; ++c) {
        means[c] = sample_mean(z[c]);
        vars[c] = sample_variance(z[c]);
    }
    const double w = sample_mean(vars);
    const double b_over_n = m >= 2 ? sample_variance(means) : 0.0;
    const double var_plus = (n_d - 1.0) / n_d * w + b_over_n;
    const double total = static_cast<double>(m) * n_d;
    if (!(var_plus > 0.0)) return std::numeric_limits<double>::quiet_NaN();

    const auto autocov = [&](std::size_t c, std::size_t t) {
        double acc = 0.0;
        for (std::size_t i = 0; i + t < n; ++i) {
            acc += (z[c][i] - means[c]) * (z[c][i + t] - means[c]);
        }
        return acc / n_d;
    };
    const auto rho = [&](std::size_t t) {
        double mean_gamma = 0.0;
        for (std::size_t c = 0; c < m; ++c) mean_gamma += autocov(c, t);
        mean_gamma /= static_cast<double>(m);
        return 1.0 - (w - mean_gamma) / var_plus;
    };

    double pair_sum = 0.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        double pair = rho(2 * k) + rho(2 * k + 1);
        if (pair <= 0.0) break;              // initial positive sequence ends
        pair = std::min(pair, prev_pair);    // enforce monotone decrease
        pair_sum += pair;
        prev_pair = pair;
    }
    const double tau = std::max(-1.0 + 2.0 * pair_sum, 1.0 / total);
    const double ess = total / tau;
    return std::clamp(ess, 1.0, total);
}

struct ParamSummary {
    std::string name;
    double mean = 0.0;
    double median = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double q975 = 0.0;
    double mcse = 0.0;
    double ess = 0.0;
    double rhat = 0.0;
};

inline ParamSummary summarize_parameter(const std::string& name, const ChainMatrix& chains) {
    detail::check_chains(chains);
    std::vector<double> pooled;
    for (const auto& chain : chains) pooled.insert(pooled.end(), chain.begin(), chain.end());

    ParamSummary s;
    s.name = name;
    s.mean = sample_mean(pooled);
    s.sd = std::sqrt(sample_variance(pooled));
    s.median = quantile_type7(pooled, 0.5);
    s.q025 = quantile_type7(pooled, 0.025);
    s.q975 = quantile_type7(pooled, 0.975);
    s.ess = bulk_ess(chains);
    s.rhat = chains.size() >= 2 ? split_rhat(chains)
                                : potential_scale_reduction(rank_normalize(split_chains(chains)));
    s.mcse = s.sd / std::sqrt(s.ess);
    return s;
}

}  // namespace sumtrunc
