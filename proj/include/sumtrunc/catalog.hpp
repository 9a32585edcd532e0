#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "log_value.hpp"
#include "math_util.hpp"
#include "series.hpp"

// Named catalog of non-negative series with known term ratios, each built from
// a validated parameter map.  Every entry documents where its ratio limit L
// comes from; entries with a closed form expose it for end-to-end validation,
// and reference_sum() provides an extended-precision plain summation that the
// closed forms (and the truncation rules) are tested against.
namespace sumtrunc {

using Params = std::map<std::string, double>;

struct ParamSpec {
    std::string name;
    std::string description;
    bool required = true;
};

struct CatalogEntry {
    std::string id;
    std::string description;
    std::vector<ParamSpec> params;
    std::function<SeriesSpec(const Params&)> build;
    // log of the analytically known sum, when one exists for these parameters.
    std::function<std::optional<LogValue>(const Params&)> closed_form;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw config_error(msg);
}

inline double get_param(const Params& params, const std::string& name) {
    const auto it = params.find(name);
    if (it == params.end()) throw config_error("missing parameter '" + name + "'");
    return it->second;
}

inline void check_params(const CatalogEntry& entry, const Params& params) {
    for (const auto& [name, value] : params) {
        bool known = false;
        for (const auto& spec : entry.params) known = known || spec.name == name;
        require(known, "unknown parameter '" + name + "' for series '" + entry.id + "'");
        require(std::isfinite(value),
                "parameter '" + name + "' for series '" + entry.id + "' must be finite");
    }
    for (const auto& spec : entry.params) {
        if (spec.required) {
            require(params.count(spec.name) > 0,
                    "series '" + entry.id + "' requires parameter '" + spec.name + "'");
        }
    }
}

inline void require_integer(double value, const std::string& name) {
    require(value >= 0.0 && value == std::floor(value) && value <= 1e15,
            "parameter '" + name + "' must be a non-negative integer");
}

// log of std::cyl_bessel_i(v, z) when it is safely representable, otherwise
// nothing.  Used by closed forms; the guard keeps us inside the range where
// the library Bessel neither overflows nor loses its accuracy.
inline std::optional<LogValue> log_std_bessel_i(double v, double z) {
    if (!(z > 0.0) || z > 600.0) return std::nullopt;
    const double value = std::cyl_bessel_i(v, z);
    if (!std::isfinite(value) || value <= 0.0) return std::nullopt;
    return LogValue::from_log(std::log(value));
}

}  // namespace detail

// Extended-precision reference: plain streaming summation of exp(log terms)
// carried in long double against a running scale.  Stops early once the terms
// are decreasing and 64 consecutive terms fall below 1e-30 of the scale (every
// further term changes the long double total by less than its last bit for a
// series that keeps decreasing).
inline LogValue reference_sum(const SeriesSpec& series, std::uint64_t max_terms = 2000000) {
    if (!series.log_term) throw config_error("series has no term function");
    long double scale = 0.0L;
    long double resid = 0.0L;
    bool started = false;
    double prev_log = log_zero_value;
    std::uint64_t inert_run = 0;
    for (std::uint64_t i = 0; i < max_terms; ++i) {
        const LogValue term = series.log_term(series.index_offset + i);
        if (term.is_zero()) continue;
        const double l = term.log();
        if (!started) {
            scale = l;
            resid = 1.0L;
            started = true;
        } else if (l <= static_cast<double>(scale)) {
            const long double frac = expl(static_cast<long double>(l) - scale);
            if (l <= prev_log && frac < 1e-30L) {
                if (++inert_run >= 64) break;
            } else {
                inert_run = 0;
            }
            resid += frac;
        } else {
            resid = resid * expl(scale - static_cast<long double>(l)) + 1.0L;
            scale = static_cast<long double>(l);
            inert_run = 0;
        }
        prev_log = l;
    }
    if (!started) return log_zero();
    return LogValue::from_log(static_cast<double>(scale + logl(resid)));
}

inline const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = [] {
        std::vector<CatalogEntry> list;

        list.push_back(CatalogEntry{
            "comp",
            "Conway-Maxwell-Poisson normalizer Z(mu, nu) = sum_n mu^n / (n!)^nu. "
            "Term ratio mu/(n+1)^nu decreases to L = 0. Closed forms: nu = 1 gives "
            "log Z = mu; nu = 2 gives Z = I0(2 sqrt(mu)).",
            {{"mu", "rate parameter, > 0"}, {"nu", "dispersion parameter, > 0"}},
            [](const Params& params) {
                const double mu = detail::get_param(params, "mu");
                const double nu = detail::get_param(params, "nu");
                detail::require(mu > 0.0, "comp: mu must be > 0");
                detail::require(nu > 0.0, "comp: nu must be > 0");
                SeriesSpec series;
                series.log_term = [mu, nu](std::uint64_t n) {
                    return LogValue::from_log(static_cast<double>(n) * std::log(mu)
                                              - nu * log_factorial(n));
                };
                series.ratio_limit = 0.0;
                series.ratio_direction = RatioDirection::DecreasesToLimit;
                return series;
            },
            [](const Params& params) -> std::optional<LogValue> {
                const double mu = detail::get_param(params, "mu");
                const double nu = detail::get_param(params, "nu");
                if (nu == 1.0) return LogValue::from_log(mu);
                if (nu == 2.0) return detail::log_std_bessel_i(0.0, 2.0 * std::sqrt(mu));
                return std::nullopt;
            }});

        list.push_back(CatalogEntry{
            "comp_reparam",
            "Reparameterized COMP normalizer Z~(mu, nu) = sum_n exp(nu (n log mu - "
            "log n!)), i.e. (mu^n/n!)^nu. Term ratio (mu/(n+1))^nu decreases to "
            "L = 0. Closed forms: nu = 1 gives log Z~ = mu; nu = 2 gives I0(2 mu).",
            {{"mu", "rate-like parameter, > 0"}, {"nu", "dispersion parameter, > 0"}},
            [](const Params& params) {
                const double mu = detail::get_param(params, "mu");
                const double nu = detail::get_param(params, "nu");
                detail::require(mu > 0.0, "comp_reparam: mu must be > 0");
                detail::require(nu > 0.0, "comp_reparam: nu must be > 0");
                SeriesSpec series;
                series.log_term = [mu, nu](std::uint64_t n) {
                    return LogValue::from_log(nu * (static_cast<double>(n) * std::log(mu)
                                                    - log_factorial(n)));
                };
                series.ratio_limit = 0.0;
                series.ratio_direction = RatioDirection::DecreasesToLimit;
                return series;
            },
            [](const Params& params) -> std::optional<LogValue> {
                const double mu = detail::get_param(params, "mu");
                const double nu = detail::get_param(params, "nu");
                if (nu == 1.0) return LogValue::from_log(mu);
                if (nu == 2.0) return detail::log_std_bessel_i(0.0, 2.0 * mu);
                return std::nullopt;
            }});

        list.push_back(CatalogEntry{
            "double_poisson",
            "Double-Poisson normalizing sum: term 0 is 1; term n is "
            "exp(-n + n ln n - ln n! + phi n (1 + ln mu - ln n)). The ratio "
            "behaves like (e mu / n)^phi (n/(n+1))^(n+...) -> 0, so L = 0. "
            "Closed form: phi = 1 reduces the terms to mu^n/n!, so log S = mu.",
            {{"mu", "mean-like parameter, > 0"}, {"phi", "dispersion parameter, > 0"}},
            [](const Params& params) {
                const double mu = detail::get_param(params, "mu");
                const double phi = detail::get_param(params, "phi");
                detail::require(mu > 0.0, "double_poisson: mu must be > 0");
                detail::require(phi > 0.0, "double_poisson: phi must be > 0");
                SeriesSpec series;
                series.log_term = [mu, phi](std::uint64_t n) {
                    if (n == 0) return LogValue::from_log(0.0);
                    const double nd = static_cast<double>(n);
                    return LogValue::from_log(-nd + nd * std::log(nd) - log_factorial(n)
                                              + phi * nd * (1.0 + std::log(mu) - std::log(nd)));
                };
                series.ratio_limit = 0.0;
                series.ratio_direction = RatioDirection::DecreasesToLimit;
                return series;
            },
            [](const Params& params) -> std::optional<LogValue> {
                if (detail::get_param(params, "phi") == 1.0) {
                    return LogValue::from_log(detail::get_param(params, "mu"));
                }
                return std::nullopt;
            }});

        list.push_back(CatalogEntry{
            "power_geometric",
            "sum_{n>=0} 1/((n+1)^2 a^(n+1)) for a > 1. Term ratio "
            "((n+1)/(n+2))^2 / a increases to L = 1/a. Closed form: Li2(1/a).",
            {{"a", "geometric base, > 1"}},
            [](const Params& params) {
                const double a = detail::get_param(params, "a");
                detail::require(a > 1.0, "power_geometric: a must be > 1");
                SeriesSpec series;
                const double log_a = std::log(a);
                series.log_term = [log_a](std::uint64_t n) {
                    const double np1 = static_cast<double>(n) + 1.0;
                    return LogValue::from_log(-2.0 * std::log(np1) - np1 * log_a);
                };
                series.ratio_limit = 1.0 / a;
                series.ratio_direction = RatioDirection::IncreasesToLimit;
                return series;
            },
            [](const Params& params) -> std::optional<LogValue> {
                const double a = detail::get_param(params, "a");
                return LogValue::from_log(std::log(dilog(1.0 / a)));
            }});

        list.push_back(CatalogEntry{
            "poisson_fact_moment",
            "r-th factorial moment of Poisson(lambda): sum_{n>=r} e^-lambda "
            "lambda^n / (n-r)!. Terms start at index r; ratio lambda/(n-r+1) "
            "decreases to L = 0. Closed form: lambda^r, i.e. log S = r ln lambda.",
            {{"lambda", "Poisson rate, > 0"}, {"r", "moment order, non-negative integer"}},
            [](const Params& params) {
                const double lambda = detail::get_param(params, "lambda");
                const double r = detail::get_param(params, "r");
                detail::require(lambda > 0.0, "poisson_fact_moment: lambda must be > 0");
                detail::require_integer(r, "r");
                const auto r_int = static_cast<std::uint64_t>(r);
                SeriesSpec series;
                series.log_term = [lambda, r_int](std::uint64_t n) {
                    if (n < r_int) return log_zero();
                    return LogValue::from_log(-lambda
                                              + static_cast<double>(n) * std::log(lambda)
                                              - log_factorial(n - r_int));
                };
                series.ratio_limit = 0.0;
                series.ratio_direction = RatioDirection::DecreasesToLimit;
                series.index_offset = r_int;
                return series;
            },
            [](const Params& params) -> std::optional<LogValue> {
                const double lambda = detail::get_param(params, "lambda");
                const double r = detail::get_param(params, "r");
                return LogValue::from_log(r * std::log(lambda));
            }});

        list.push_back(CatalogEntry{
            "negbin_marginal",
            "Marginal pmf of a binomially thinned negative binomial at count x: "
            "sum_{n>=0} NB(x+n; mu, phi) C(x+n, x) eta^x (1-eta)^n. Term ratio "
            "(n+x+phi)/(n+1) (mu/(mu+phi)) (1-eta) tends to L = "
            "(mu/(mu+phi))(1-eta), from below when x+phi < 1 and from above "
            "when x+phi > 1. Closed form: NB(x; eta mu, phi).",
            {{"mu", "NB mean, > 0"},
             {"phi", "NB dispersion, > 0"},
             {"eta", "thinning probability, in (0, 1]"},
             {"x", "observed count, non-negative integer"}},
            [](const Params& params) {
                const double mu = detail::get_param(params, "mu");
                const double phi = detail::get_param(params, "phi");
                const double eta = detail::get_param(params, "eta");
                const double x = detail::get_param(params, "x");
                detail::require(mu > 0.0, "negbin_marginal: mu must be > 0");
                detail::require(phi > 0.0, "negbin_marginal: phi must be > 0");
                detail::require(eta > 0.0 && eta <= 1.0,
                                "negbin_marginal: eta must lie in (0, 1]");
                detail::require_integer(x, "x");
                const auto x_int = static_cast<std::uint64_t>(x);
                SeriesSpec series;
                // The whole log-term is assembled in extended precision and
                // rounded once: with thousands of terms contributing, a
                // rounding bias that grows with n would otherwise dominate
                // the sum's error (see log_negbin_pmf).  C(x+n, x) goes
                // through the gamma-ratio helper for the same reason.
                series.log_term = [mu, phi, eta, x_int](std::uint64_t n) {
                    if (eta >= 1.0 && n > 0) return log_zero();  // (1-eta)^n = 0
                    const long double nd = static_cast<long double>(n);
                    long double v = detail::log_negbin_pmf_impl(x_int + n, mu, phi);
                    if (n > 0) {
                        v += nd * std::log1p(-static_cast<long double>(eta));
                    }
                    if (x_int > 0) {
                        const long double xd = static_cast<long double>(x_int);
                        v += detail::log_gamma_ratio_impl(nd + 1.0L, xd)  // lgamma(n+x+1) - lgamma(n+1)
                           - std::lgamma(xd + 1.0L)
                           + xd * std::log(static_cast<long double>(eta));
                    }
                    return LogValue::from_log(static_cast<double>(v));
                };
                series.ratio_limit = (mu / (mu + phi)) * (1.0 - eta);
                series.ratio_direction = x + phi < 1.0 ? RatioDirection::IncreasesToLimit
                                                       : RatioDirection::DecreasesToLimit;
                return series;
            },
            [](const Params& params) -> std::optional<LogValue> {
                const double mu = detail::get_param(params, "mu");
                const double phi = detail::get_param(params, "phi");
                const double eta = detail::get_param(params, "eta");
                const double x = detail::get_param(params, "x");
                return LogValue::from_log(
                    log_negbin_pmf(static_cast<std::uint64_t>(x), eta * mu, phi));
            }});

        list.push_back(CatalogEntry{
            "sentinel_rho0",
            "Probability that a cluster is entirely unobserved under per-item "
            "detection eta: sum_n Pr(Y=n) (1-eta)^n. Provide lambda for a "
            "Poisson cluster size (L = 0, closed form e^(-lambda eta)) or mu "
            "and phi for a negative binomial one (L = (mu/(mu+phi))(1-eta), "
            "closed form (phi/(eta mu + phi))^phi).",
            {{"eta", "per-item detection probability, in (0, 1]"},
             {"lambda", "Poisson cluster-size rate, > 0 (exclusive with mu/phi)", false},
             {"mu", "NB cluster-size mean, > 0 (requires phi)", false},
             {"phi", "NB cluster-size dispersion, > 0 (requires mu)", false}},
            [](const Params& params) {
                const double eta = detail::get_param(params, "eta");
                detail::require(eta > 0.0 && eta <= 1.0,
                                "sentinel_rho0: eta must lie in (0, 1]");
                const bool has_lambda = params.count("lambda") > 0;
                const bool has_nb = params.count("mu") > 0 || params.count("phi") > 0;
                detail::require(has_lambda != has_nb,
                                "sentinel_rho0: provide either lambda or both mu and phi");
                SeriesSpec series;
                if (has_lambda) {
                    const double lambda = detail::get_param(params, "lambda");
                    detail::require(lambda > 0.0, "sentinel_rho0: lambda must be > 0");
                    series.log_term = [lambda, eta](std::uint64_t n) {
                        const double tail = n == 0
                            ? 0.0
                            : static_cast<double>(n) * std::log1p(-eta);
                        if (tail == log_zero_value) return log_zero();
                        return LogValue::from_log(log_poisson_pmf(n, lambda) + tail);
                    };
                    series.ratio_limit = 0.0;
                    series.ratio_direction = RatioDirection::DecreasesToLimit;
                } else {
                    const double mu = detail::get_param(params, "mu");
                    const double phi = detail::get_param(params, "phi");
                    detail::require(mu > 0.0, "sentinel_rho0: mu must be > 0");
                    detail::require(phi > 0.0, "sentinel_rho0: phi must be > 0");
                    series.log_term = [mu, phi, eta](std::uint64_t n) {
                        if (eta >= 1.0 && n > 0) return log_zero();  // (1-eta)^n = 0
                        long double v = detail::log_negbin_pmf_impl(n, mu, phi);
                        if (n > 0) {
                            v += static_cast<long double>(n)
                               * std::log1p(-static_cast<long double>(eta));
                        }
                        return LogValue::from_log(static_cast<double>(v));
                    };
                    series.ratio_limit = (mu / (mu + phi)) * (1.0 - eta);
                    series.ratio_direction = phi < 1.0 ? RatioDirection::IncreasesToLimit
                                                       : RatioDirection::DecreasesToLimit;
                }
                return series;
            },
            [](const Params& params) -> std::optional<LogValue> {
                const double eta = detail::get_param(params, "eta");
                if (params.count("lambda") > 0) {
                    return LogValue::from_log(-detail::get_param(params, "lambda") * eta);
                }
                const double mu = detail::get_param(params, "mu");
                const double phi = detail::get_param(params, "phi");
                const long double ratio = static_cast<long double>(eta)
                                        * static_cast<long double>(mu)
                                        / static_cast<long double>(phi);
                return LogValue::from_log(static_cast<double>(
                    -static_cast<long double>(phi) * std::log1p(ratio)));
            }});

        list.push_back(CatalogEntry{
            "erlang_full",
            "Interarrival density of a zero-truncated-Poisson(mu) mixture of "
            "Erlang(n, beta) components at x: sum_{n>=1} "
            "[mu^n e^-mu / (n! (1-e^-mu))] [beta^n x^(n-1) e^(-beta x) / (n-1)!]. "
            "Terms start at index 1; ratio z/((n+1) n) with z = mu beta x "
            "decreases to L = 0. Closed form (via the library Bessel when "
            "representable): prefactor sqrt(z) I1(2 sqrt z).",
            {{"x", "evaluation point, > 0"},
             {"mu", "cluster-size rate, > 0"},
             {"beta", "exponential rate, > 0"}},
            [](const Params& params) {
                const double x = detail::get_param(params, "x");
                const double mu = detail::get_param(params, "mu");
                const double beta = detail::get_param(params, "beta");
                detail::require(x > 0.0, "erlang_full: x must be > 0");
                detail::require(mu > 0.0, "erlang_full: mu must be > 0");
                detail::require(beta > 0.0, "erlang_full: beta must be > 0");
                const double log_z = std::log(mu) + std::log(beta) + std::log(x);
                const double prefactor =
                    -(mu + beta * x) - log1mexp(-mu) - std::log(x);
                SeriesSpec series;
                series.log_term = [prefactor, log_z](std::uint64_t n) {
                    if (n == 0) return log_zero();
                    return LogValue::from_log(prefactor + static_cast<double>(n) * log_z
                                              - log_factorial(n) - log_factorial(n - 1));
                };
                series.ratio_limit = 0.0;
                series.ratio_direction = RatioDirection::DecreasesToLimit;
                series.index_offset = 1;
                return series;
            },
            [](const Params& params) -> std::optional<LogValue> {
                const double x = detail::get_param(params, "x");
                const double mu = detail::get_param(params, "mu");
                const double beta = detail::get_param(params, "beta");
                const double z = mu * beta * x;
                const auto bessel = detail::log_std_bessel_i(1.0, 2.0 * std::sqrt(z));
                if (!bessel) return std::nullopt;
                return LogValue::from_log(-(mu + beta * x) - log1mexp(-mu) - std::log(x)
                                          + 0.5 * std::log(z) + bessel->log());
            }});

        list.push_back(CatalogEntry{
            "bessel_i",
            "Modified Bessel function I_v(z) = sum_{k>=0} (z/2)^(v+2k) / "
            "(k! Gamma(v+k+1)) for v >= 0, z > 0. Term ratio "
            "(z/2)^2 / ((k+1)(v+k+1)) decreases to L = 0. Closed form: the "
            "library cyl_bessel_i when representable.",
            {{"v", "order, >= 0"}, {"z", "argument, > 0"}},
            [](const Params& params) {
                const double v = detail::get_param(params, "v");
                const double z = detail::get_param(params, "z");
                detail::require(v >= 0.0, "bessel_i: v must be >= 0");
                detail::require(z > 0.0, "bessel_i: z must be > 0");
                const double log_half_z = std::log(0.5 * z);
                SeriesSpec series;
                series.log_term = [v, log_half_z](std::uint64_t k) {
                    const double kd = static_cast<double>(k);
                    return LogValue::from_log((v + 2.0 * kd) * log_half_z
                                              - log_factorial(k)
                                              - std::lgamma(v + kd + 1.0));
                };
                series.ratio_limit = 0.0;
                series.ratio_direction = RatioDirection::DecreasesToLimit;
                return series;
            },
            [](const Params& params) -> std::optional<LogValue> {
                return detail::log_std_bessel_i(detail::get_param(params, "v"),
                                                detail::get_param(params, "z"));
            }});

        list.push_back(CatalogEntry{
            "telescoping",
            "sum_{n>=0} 1/((n+1)(n+2)), whose term ratio (n+1)/(n+3) increases "
            "to L = 1: outside the adaptive rules' domain, kept to exercise the "
            "L >= 1 rejection. The sum telescopes to exactly 1.",
            {},
            [](const Params&) {
                SeriesSpec series;
                series.log_term = [](std::uint64_t n) {
                    const double nd = static_cast<double>(n);
                    return LogValue::from_log(-std::log(nd + 1.0) - std::log(nd + 2.0));
                };
                series.ratio_limit = 1.0;
                series.ratio_direction = RatioDirection::IncreasesToLimit;
                return series;
            },
            [](const Params&) -> std::optional<LogValue> {
                return LogValue::from_log(0.0);
            }});

        return list;
    }();
    return entries;
}

inline const CatalogEntry& catalog_lookup(const std::string& id) {
    for (const auto& entry : catalog()) {
        if (entry.id == id) return entry;
    }
    std::string known;
    for (const auto& entry : catalog()) {
        if (!known.empty()) known += ", ";
        known += entry.id;
    }
    throw config_error("unknown series '" + id + "'; known series: " + known);
}

// Validates the parameter map against the entry's declared parameters and
// builds the series.
inline SeriesSpec make_series(const std::string& id, const Params& params) {
    const CatalogEntry& entry = catalog_lookup(id);
    detail::check_params(entry, params);
    return entry.build(params);
}

inline std::optional<LogValue> closed_form(const std::string& id, const Params& params) {
    const CatalogEntry& entry = catalog_lookup(id);
    detail::check_params(entry, params);
    return entry.closed_form(params);
}

}  // namespace sumtrunc
