#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

#include "catalog.hpp"
#include "log_value.hpp"
#include "math_util.hpp"
#include "series.hpp"
#include "truncation.hpp"

// Moment and detection-model summaries of count distributions, computed as
// adaptively truncated series.  Moment series rise to a mode before decaying,
// so each one is split there first (exact head, guaranteed-truncation tail).
namespace sumtrunc {

// A count distribution with the ratio-limit metadata the truncation rules
// need: lim pmf(n+1)/pmf(n).
struct CountModel {
    std::string name;
    std::function<double(std::uint64_t)> log_pmf;
    double pmf_ratio_limit = 0.0;
};

inline CountModel poisson_counts(double lambda) {
    if (!(lambda > 0.0)) throw config_error("poisson_counts: lambda must be > 0");
    return CountModel{
        "poisson",
        [lambda](std::uint64_t n) { return log_poisson_pmf(n, lambda); },
        0.0};
}

inline CountModel negbin_counts(double mu, double phi) {
    if (!(mu > 0.0)) throw config_error("negbin_counts: mu must be > 0");
    if (!(phi > 0.0)) throw config_error("negbin_counts: phi must be > 0");
    return CountModel{
        "negbin",
        [mu, phi](std::uint64_t n) { return log_negbin_pmf(n, mu, phi); },
        mu / (mu + phi)};
}

// Count model addressable the same way catalog series are: "poisson" takes
// lambda, "negbin" takes mu and phi.
inline CountModel make_count_model(const std::string& base, const Params& params) {
    if (base == "poisson") return poisson_counts(detail::get_param(params, "lambda"));
    if (base == "negbin") {
        return negbin_counts(detail::get_param(params, "mu"),
                             detail::get_param(params, "phi"));
    }
    throw config_error("unknown count model '" + base + "'; known models: negbin, poisson");
}

struct MomentResult {
    double value = 0.0;
    LogValue log_value;
    std::uint64_t n_evaluations = 0;
    bool converged = false;
};

namespace detail {

// Split the series at its mode, truncate the decreasing tail with the
// configured rule, and recombine.  The fixed cap is exempt: its contract is
// "first cap_k + 1 terms", which a split would change.
inline MomentResult split_then_truncate(const SeriesSpec& series, const TruncationConfig& config) {
    MomentResult out;
    if (config.method == Method::FixedCap) {
        const TruncationResult result = truncate(series, config);
        out.log_value = result.log_sum;
        out.n_evaluations = result.n_evaluations;
        out.converged = result.converged;
    } else {
        const SplitResult split = split_at_tail(series);
        const TruncationResult result = truncate(split.tail, config);
        out.log_value = log_add(split.head_log_sum, result.log_sum);
        out.n_evaluations = split.n_evaluations + result.n_evaluations;
        out.converged = result.converged;
    }
    out.value = out.log_value.linear();
    return out;
}

}  // namespace detail

// E[N(N-1)...(N-r+1)] = sum_{n>=r} n!/(n-r)! pmf(n), r >= 1.
inline MomentResult factorial_moment(const CountModel& model, std::uint64_t r,
                                     const TruncationConfig& config = {}) {
    if (r < 1) throw config_error("factorial_moment: r must be >= 1");
    if (!model.log_pmf) throw config_error("factorial_moment: model has no pmf");
    SeriesSpec series;
    series.log_term = [&model, r](std::uint64_t n) {
        if (n < r) return log_zero();
        return LogValue::from_log(model.log_pmf(n) + log_factorial(n) - log_factorial(n - r));
    };
    series.ratio_limit = model.pmf_ratio_limit;  // (n+1)/(n+1-r) -> 1 leaves L alone
    series.index_offset = r;
    return detail::split_then_truncate(series, config);
}

// E[N^r] = sum_{n>=1} n^r pmf(n), r >= 1 (the n = 0 term vanishes).
inline MomentResult raw_moment(const CountModel& model, std::uint64_t r,
                               const TruncationConfig& config = {}) {
    if (r < 1) throw config_error("raw_moment: r must be >= 1");
    if (!model.log_pmf) throw config_error("raw_moment: model has no pmf");
    SeriesSpec series;
    series.log_term = [&model, r](std::uint64_t n) {
        return LogValue::from_log(model.log_pmf(n)
                                  + static_cast<double>(r) * std::log(static_cast<double>(n)));
    };
    series.ratio_limit = model.pmf_ratio_limit;  // ((n+1)/n)^r -> 1 leaves L alone
    series.index_offset = 1;
    return detail::split_then_truncate(series, config);
}

struct SentinelSizeResult {
    double expected_size = 0.0;  // E[X'] = (E[Y] - E[Y (1-eta)^Y]) / (1 - rho0)
    double rho0 = 0.0;           // P(no item of the cluster is detected)
    std::uint64_t n_evaluations = 0;
    bool converged = false;
};

// Expected observed-cluster size under sentinel detection: each of the Y items
// is seen independently with probability eta, the cluster is recorded only if
// at least one item is seen.  All three ingredients are adaptively truncated
// series; each runs at epsilon/4 so their assembly stays within epsilon.
inline SentinelSizeResult sentinel_expected_cluster_size(const CountModel& model, double eta,
                                                         const TruncationConfig& config = {}) {
    if (!(eta > 0.0) || !(eta < 1.0)) {
        throw config_error("sentinel_expected_cluster_size: eta must lie in (0, 1)");
    }
    if (!model.log_pmf) throw config_error("sentinel_expected_cluster_size: model has no pmf");
    TruncationConfig piece = config;
    piece.epsilon = config.epsilon / 4.0;

    const double log_keep = std::log1p(-eta);  // log(1 - eta)
    const double thinned_limit = model.pmf_ratio_limit * (1.0 - eta);

    SeriesSpec rho0_series;  // sum_n pmf(n) (1-eta)^n
    rho0_series.log_term = [&model, log_keep](std::uint64_t n) {
        return LogValue::from_log(model.log_pmf(n) + static_cast<double>(n) * log_keep);
    };
    rho0_series.ratio_limit = thinned_limit;

    SeriesSpec damped_mean_series;  // sum_{n>=1} n pmf(n) (1-eta)^n
    damped_mean_series.log_term = [&model, log_keep](std::uint64_t n) {
        return LogValue::from_log(model.log_pmf(n) + static_cast<double>(n) * log_keep
                                  + std::log(static_cast<double>(n)));
    };
    damped_mean_series.ratio_limit = thinned_limit;
    damped_mean_series.index_offset = 1;

    const TruncationResult rho0 = truncate(rho0_series, piece);
    const MomentResult damped = detail::split_then_truncate(damped_mean_series, piece);
    const MomentResult mean = raw_moment(model, 1, piece);

    SentinelSizeResult out;
    out.rho0 = rho0.log_sum.linear();
    out.n_evaluations = rho0.n_evaluations + damped.n_evaluations + mean.n_evaluations;
    out.converged = rho0.converged && damped.converged && mean.converged;

    const double denom = -std::expm1(rho0.log_sum.log());  // 1 - rho0, no cancellation
    if (!(denom >= 1e-12)) {
        throw std::domain_error(
            "sentinel_expected_cluster_size: rho0 is numerically 1, the observed-cluster "
            "fraction 1 - rho0 vanishes; no stable answer at this eta");
    }
    const LogValue numerator = log_diff(mean.log_value, damped.log_value);
    out.expected_size = numerator.linear() / denom;
    return out;
}

}  // namespace sumtrunc
