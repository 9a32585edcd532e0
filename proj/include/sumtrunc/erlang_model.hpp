#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "log_value.hpp"
#include "math_util.hpp"
#include "optimize.hpp"
#include "parallel.hpp"
#include "series.hpp"
#include "truncation.hpp"

// Interarrival model: a cluster holds N ~ zero-truncated Poisson(mu) events
// whose total duration is X | N ~ Gamma(N, beta), so the density of X is an
// infinite mixture f(x) = sum_{n>=1} p_mu(n) f_{X|N}(x | n).  Every term
// shares the factor P = exp(-(mu + beta x)) / ((1 - e^-mu) x); with z =
// mu beta x the series reduces to f = P * G(z), G(z) = sum z^n/(n!(n-1)!).
// The truncation rules run on the reduced series (P factored out of every
// term), which makes the tolerance act at the density's own scale; the
// "full" and "Bessel" representations below differ in how the remaining
// factor is arranged, giving genuinely distinct floating-point paths.
//
// The Hessian of the log-likelihood needs only two more strictly positive
// primitives, C(z) = sum n z^n/(n!(n-1)!) and D2(z) = sum n^2 z^n/(n!(n-1)!),
// because p_mu'(n) = p_mu(n)(n - mu)/mu and p_mu''(n) = p_mu(n)((mu-n)^2 - n)/mu^2
// turn every derivative series into a combination of G, C, D2 after the
// prefactor cancels in the ratios RC = C/G and RD2 = D2/G.  (The simpler
// weight (mu-n)^2/mu^2 - 1/mu, which drops the -n term, agrees with finite
// differences only at the score's zero; the -n form holds everywhere.)  The
// zero-truncation normalizer -log(1 - e^-mu) contributes the exact extra
// term e^-mu/(1-e^-mu)^2 to each observation's d2/dmu2.
namespace sumtrunc {

enum class ErlangRepresentation { Full, Bessel };

inline const char* representation_name(ErlangRepresentation rep) {
    return rep == ErlangRepresentation::Full ? "full" : "bessel";
}

struct ErlangTruncation {
    enum class Kind { Fixed, Adaptive };
    Kind kind = Kind::Adaptive;
    std::uint64_t fixed_terms = 1000;  // series terms summed when Fixed
    double epsilon = std::numeric_limits<double>::epsilon();
    std::uint64_t max_terms = 200000;  // adaptive safety cap

    static ErlangTruncation fixed(std::uint64_t k) {
        ErlangTruncation t;
        t.kind = Kind::Fixed;
        t.fixed_terms = k;
        return t;
    }
    static ErlangTruncation adaptive(double eps) {
        ErlangTruncation t;
        t.kind = Kind::Adaptive;
        t.epsilon = eps;
        return t;
    }
};

inline const char* truncation_name(const ErlangTruncation& t) {
    return t.kind == ErlangTruncation::Kind::Fixed ? "fixed" : "adaptive";
}

namespace detail {

inline void check_erlang_args(std::span<const double> data, double mu, double beta) {
    if (data.empty()) throw config_error("erlang: no observations");
    if (!(mu > 0.0) || !(beta > 0.0)) throw config_error("erlang: mu and beta must be > 0");
    for (const double x : data) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw config_error("erlang: observations must be positive finite reals");
        }
    }
    if (!(mu < 1e15)) throw config_error("erlang: mu too large");
}

inline TruncationResult run_erlang_series(const SeriesSpec& series, const ErlangTruncation& trunc,
                                          double epsilon) {
    TruncationConfig config;
    if (trunc.kind == ErlangTruncation::Kind::Fixed) {
        if (trunc.fixed_terms < 1) throw config_error("erlang: fixed_terms must be >= 1");
        config.method = Method::FixedCap;
        config.cap_k = trunc.fixed_terms - 1;  // cap_k + 1 terms from the first index
    } else {
        if (!(trunc.epsilon > 0.0)) throw config_error("erlang: epsilon must be > 0");
        config.method = Method::SumToThreshold;
        config.epsilon = epsilon;
        config.max_terms = trunc.max_terms;
    }
    return truncate(series, config);
}

// Reduced mixture series G(z) with an optional log-weight exponent:
// weight_power = 0 -> G, 1 -> C, 2 -> D2.
inline SeriesSpec erlang_reduced_series(double log_z, int weight_power) {
    SeriesSpec series;
    series.log_term = [log_z, weight_power](std::uint64_t n) {
        const double nd = static_cast<double>(n);
        double l = nd * log_z - log_factorial(n) - log_factorial(n - 1);
        if (weight_power > 0) l += static_cast<double>(weight_power) * std::log(nd);
        return LogValue::from_log(l);
    };
    series.ratio_limit = 0.0;
    series.ratio_direction = RatioDirection::DecreasesToLimit;
    series.index_offset = 1;
    return series;
}

// Bessel-path series for I_1(2 sqrt z): terms (sqrt z)^(2k+1) / (k! (k+1)!).
inline SeriesSpec erlang_bessel_series(double half_log_z) {
    SeriesSpec series;
    series.log_term = [half_log_z](std::uint64_t k) {
        return LogValue::from_log((2.0 * static_cast<double>(k) + 1.0) * half_log_z
                                  - log_factorial(k) - log_factorial(k + 1));
    };
    series.ratio_limit = 0.0;
    series.ratio_direction = RatioDirection::DecreasesToLimit;
    return series;
}

}  // namespace detail

struct ErlangLoglik {
    double value = 0.0;
    std::uint64_t n_evaluations = 0;
    bool converged = true;
};

inline ErlangLoglik erlang_marginal_loglik(std::span<const double> data, double mu, double beta,
                                           ErlangRepresentation rep,
                                           const ErlangTruncation& trunc = {}) {
    detail::check_erlang_args(data, mu, beta);
    ErlangLoglik out;
    const double log_mu = std::log(mu), log_beta = std::log(beta);
    for (const double x : data) {
        const double prefactor = -(mu + beta * x) - log1mexp(-mu) - std::log(x);
        if (rep == ErlangRepresentation::Full) {
            const double log_z = std::log(mu * beta * x);
            const TruncationResult g =
                detail::run_erlang_series(detail::erlang_reduced_series(log_z, 0), trunc,
                                          trunc.epsilon);
            out.value += prefactor + g.log_sum.log();
            out.n_evaluations += g.n_evaluations;
            out.converged = out.converged && g.converged;
        } else {
            const double half_log_z = 0.5 * (log_mu + log_beta + std::log(x));
            const TruncationResult bessel =
                detail::run_erlang_series(detail::erlang_bessel_series(half_log_z), trunc,
                                          trunc.epsilon);
            out.value += prefactor + half_log_z + bessel.log_sum.log();
            out.n_evaluations += bessel.n_evaluations;
            out.converged = out.converged && bessel.converged;
        }
    }
    return out;
}

struct Matrix2 {
    double mumu = 0.0;
    double mubeta = 0.0;
    double betabeta = 0.0;
};

struct ErlangHessianResult {
    Matrix2 hessian;            // d2 loglik, exact zero-truncation normalizer included
    double grad_mu = 0.0;       // first derivatives come along for free
    double grad_beta = 0.0;
    double mixed_displayed = 0.0;    // mixed partial under the f11 = f10 + f01 identity
    double mixed_discrepancy = 0.0;  // |hessian.mubeta - mixed_displayed|
    std::uint64_t n_evaluations = 0;
    bool converged = true;
};

// Analytic Hessian from the three reduced primitives, each truncated at
// epsilon/4 so their assembly stays within epsilon.
inline ErlangHessianResult erlang_hessian(std::span<const double> data, double mu, double beta,
                                          const ErlangTruncation& trunc = {}) {
    detail::check_erlang_args(data, mu, beta);
    ErlangHessianResult out;
    const double quarter_eps = trunc.epsilon / 4.0;
    for (const double x : data) {
        const double log_z = std::log(mu * beta * x);
        const TruncationResult g = detail::run_erlang_series(
            detail::erlang_reduced_series(log_z, 0), trunc, quarter_eps);
        const TruncationResult c = detail::run_erlang_series(
            detail::erlang_reduced_series(log_z, 1), trunc, quarter_eps);
        const TruncationResult d2 = detail::run_erlang_series(
            detail::erlang_reduced_series(log_z, 2), trunc, quarter_eps);
        out.n_evaluations += g.n_evaluations + c.n_evaluations + d2.n_evaluations;
        out.converged = out.converged && g.converged && c.converged && d2.converged;

        const double rc = std::exp(c.log_sum.log() - g.log_sum.log());
        const double rd2 = std::exp(d2.log_sum.log() - g.log_sum.log());
        const double f10 = rc / mu - 1.0;                                    // f^(1,0)/f
        const double f01 = rc / beta - x;                                    // f^(0,1)/f
        const double f20 = 1.0 - 2.0 * rc / mu + (rd2 - rc) / (mu * mu);     // f^(2,0)/f
        const double f02 = x * x - 2.0 * x * rc / beta + (rd2 - rc) / (beta * beta);
        const double f11 = rd2 / (mu * beta) - x * rc / mu - rc / beta + x;  // f^(1,1)/f

        out.grad_mu += f10;
        out.grad_beta += f01;
        out.hessian.mumu += f20 - f10 * f10;
        out.hessian.mubeta += f11 - f10 * f01;
        out.hessian.betabeta += f02 - f01 * f01;
        out.mixed_displayed += (f10 + f01) - f10 * f01;
    }
    // Zero-truncation normalizer -log(1 - e^-mu), once per observation.
    const double j = static_cast<double>(data.size());
    out.grad_mu += -j * std::exp(-mu - log1mexp(-mu));
    out.hessian.mumu += j * std::exp(-mu - 2.0 * log1mexp(-mu));
    out.mixed_discrepancy = std::abs(out.hessian.mubeta - out.mixed_displayed);
    return out;
}

// Central finite differences of the marginal log-likelihood, the "Numerical"
// Hessian column.  Steps are relative to the parameter values.
inline Matrix2 erlang_fd_hessian(std::span<const double> data, double mu, double beta,
                                 ErlangRepresentation rep, const ErlangTruncation& trunc = {},
                                 double rel_step = 1e-5) {
    detail::check_erlang_args(data, mu, beta);
    const double h_mu = rel_step * mu, h_beta = rel_step * beta;
    const auto f = [&](double m, double b) {
        return erlang_marginal_loglik(data, m, b, rep, trunc).value;
    };
    const double f0 = f(mu, beta);
    Matrix2 h;
    h.mumu = (f(mu + h_mu, beta) - 2.0 * f0 + f(mu - h_mu, beta)) / (h_mu * h_mu);
    h.betabeta = (f(mu, beta + h_beta) - 2.0 * f0 + f(mu, beta - h_beta)) / (h_beta * h_beta);
    h.mubeta = (f(mu + h_mu, beta + h_beta) - f(mu + h_mu, beta - h_beta)
                - f(mu - h_mu, beta + h_beta) + f(mu - h_mu, beta - h_beta))
               / (4.0 * h_mu * h_beta);
    return h;
}

struct Interval {
    double lo = std::numeric_limits<double>::quiet_NaN();
    double hi = std::numeric_limits<double>::quiet_NaN();

    bool contains(double value) const { return lo <= value && value <= hi; }
    bool is_finite() const { return std::isfinite(lo) && std::isfinite(hi); }
};

namespace detail {

// Delta-method 95% intervals from a Hessian of the log-likelihood at the
// optimum; finite only when -H is positive definite.
inline std::pair<Interval, Interval> delta_intervals(double mu_hat, double beta_hat,
                                                     const Matrix2& hessian) {
    const double a = -hessian.mumu, b = -hessian.mubeta, c = -hessian.betabeta;
    const double det = a * c - b * b;
    if (!(a > 0.0) || !(det > 0.0)) return {};
    const double var_mu = c / det, var_beta = a / det;
    const double q = normal_quantile(0.975);
    const double se_mu = std::sqrt(var_mu), se_beta = std::sqrt(var_beta);
    return {Interval{mu_hat - q * se_mu, mu_hat + q * se_mu},
            Interval{beta_hat - q * se_beta, beta_hat + q * se_beta}};
}

}  // namespace detail

struct ErlangMmleResult {
    double mu_hat = 0.0;
    double beta_hat = 0.0;
    double loglik = 0.0;
    Matrix2 hessian;     // analytic, at the optimum
    Matrix2 hessian_fd;  // central finite differences, at the optimum
    Interval ci_mu, ci_beta;        // delta method from the analytic Hessian
    Interval ci_mu_fd, ci_beta_fd;  // delta method from the numerical Hessian
    double hessian_mixed_discrepancy = 0.0;
    std::uint64_t n_optimizer_evals = 0;
    bool converged = false;
    ErlangRepresentation representation = ErlangRepresentation::Full;
    ErlangTruncation truncation;
};

inline ErlangMmleResult erlang_mmle(std::span<const double> data,
                                    ErlangRepresentation rep = ErlangRepresentation::Full,
                                    const ErlangTruncation& trunc = {},
                                    std::optional<std::pair<double, double>> init = std::nullopt) {
    if (data.empty()) throw config_error("erlang_mmle: no observations");
    double mu0, beta0;
    if (init) {
        mu0 = init->first;
        beta0 = init->second;
        if (!(mu0 > 0.0) || !(beta0 > 0.0)) {
            throw config_error("erlang_mmle: init must be positive");
        }
    } else {
        // Moment initialization: with N approximately Poisson(mu), E[X] = mu/beta
        // and Var[X] = 2 mu/beta^2, so beta0 = 2 mean/var and mu0 = beta0 * mean.
        const double mean = sample_mean(data);
        const double var = data.size() >= 2 ? sample_variance(data) : mean * mean;
        beta0 = std::clamp(2.0 * mean / std::max(var, 1e-300), 1e-6, 1e9);
        mu0 = std::clamp(beta0 * mean, 1e-3, 1e12);
    }

    const auto objective = [&](const std::vector<double>& logs) {
        return -erlang_marginal_loglik(data, std::exp(logs[0]), std::exp(logs[1]), rep, trunc)
                    .value;
    };

    ErlangMmleResult out;
    out.representation = rep;
    out.truncation = trunc;

    NelderMeadOptions options;
    options.initial_step = 0.4;
    NelderMeadResult best;
    std::vector<double> start{std::log(mu0), std::log(beta0)};
    for (int attempt = 0; attempt < 3; ++attempt) {
        NelderMeadResult fit = nelder_mead_minimize(objective, start, options);
        out.n_optimizer_evals += fit.n_evaluations;
        if (best.x.empty() || fit.f_min < best.f_min) best = fit;
        if (fit.converged) {
            best = fit;
            best.converged = true;
            break;
        }
        start = fit.x;  // restart the simplex around the best point seen
    }
    out.converged = best.converged;
    out.mu_hat = std::exp(best.x[0]);
    out.beta_hat = std::exp(best.x[1]);
    out.loglik = -best.f_min;

    const ErlangHessianResult analytic = erlang_hessian(data, out.mu_hat, out.beta_hat, trunc);
    out.hessian = analytic.hessian;
    out.hessian_mixed_discrepancy = analytic.mixed_discrepancy;
    out.hessian_fd = erlang_fd_hessian(data, out.mu_hat, out.beta_hat, rep, trunc);
    std::tie(out.ci_mu, out.ci_beta) =
        detail::delta_intervals(out.mu_hat, out.beta_hat, out.hessian);
    std::tie(out.ci_mu_fd, out.ci_beta_fd) =
        detail::delta_intervals(out.mu_hat, out.beta_hat, out.hessian_fd);
    return out;
}

// Simulation driver for the recovery study: each replicate draws J cluster
// durations from the true model, fits by MMLE, and scores CI coverage.
struct ErlangRepSummary {
    std::uint64_t rep = 0;
    double mu_hat = 0.0;
    double beta_hat = 0.0;
    bool converged = false;
    bool cover_mu_analytic = false;
    bool cover_mu_numerical = false;
    bool cover_beta_analytic = false;
    bool cover_beta_numerical = false;
};

struct ErlangSimulationResult {
    double rmse_mu = 0.0;
    double rmse_beta = 0.0;
    double coverage_mu_analytic = 0.0;
    double coverage_mu_numerical = 0.0;
    double coverage_beta_analytic = 0.0;
    double coverage_beta_numerical = 0.0;
    std::uint64_t n_converged = 0;
    std::vector<ErlangRepSummary> replicates;
};

inline std::vector<double> erlang_simulate_data(double true_mu, double true_beta,
                                                std::size_t j, std::mt19937& rng) {
    std::poisson_distribution<std::uint64_t> poisson(true_mu);
    std::gamma_distribution<double> unit_exp(1.0, 1.0);
    std::vector<double> xs;
    xs.reserve(j);
    for (std::size_t i = 0; i < j; ++i) {
        std::uint64_t n = 0;
        while (n == 0) n = poisson(rng);  // zero-truncated Poisson by rejection
        std::gamma_distribution<double> gamma(static_cast<double>(n), 1.0 / true_beta);
        xs.push_back(gamma(rng));
    }
    return xs;
}

inline ErlangSimulationResult erlang_simulate(double true_mu, double true_beta, std::size_t j,
                                              std::size_t n_reps, std::uint64_t seed,
                                              ErlangRepresentation rep,
                                              const ErlangTruncation& trunc) {
    if (n_reps == 0) throw config_error("erlang_simulate: n_reps must be >= 1");
    ErlangSimulationResult out;
    out.replicates.resize(n_reps);
    parallel_for(n_reps, [&](std::size_t r) {
        std::seed_seq sseq{static_cast<std::uint32_t>(seed),
                           static_cast<std::uint32_t>(seed >> 32),
                           static_cast<std::uint32_t>(r)};
        std::mt19937 rng(sseq);
        const std::vector<double> xs = erlang_simulate_data(true_mu, true_beta, j, rng);
        ErlangRepSummary& rep_summary = out.replicates[r];
        rep_summary.rep = r;
        try {
            const ErlangMmleResult fit = erlang_mmle(xs, rep, trunc);
            rep_summary.mu_hat = fit.mu_hat;
            rep_summary.beta_hat = fit.beta_hat;
            rep_summary.converged = fit.converged;
            rep_summary.cover_mu_analytic = fit.ci_mu.is_finite() && fit.ci_mu.contains(true_mu);
            rep_summary.cover_mu_numerical =
                fit.ci_mu_fd.is_finite() && fit.ci_mu_fd.contains(true_mu);
            rep_summary.cover_beta_analytic =
                fit.ci_beta.is_finite() && fit.ci_beta.contains(true_beta);
            rep_summary.cover_beta_numerical =
                fit.ci_beta_fd.is_finite() && fit.ci_beta_fd.contains(true_beta);
        } catch (const std::exception&) {
            rep_summary.converged = false;  // failure surfaced per replicate, run continues
        }
    });

    double se_mu = 0.0, se_beta = 0.0;
    for (const ErlangRepSummary& r : out.replicates) {
        if (!r.converged) continue;
        ++out.n_converged;
        se_mu += (r.mu_hat - true_mu) * (r.mu_hat - true_mu);
        se_beta += (r.beta_hat - true_beta) * (r.beta_hat - true_beta);
        out.coverage_mu_analytic += r.cover_mu_analytic ? 1.0 : 0.0;
        out.coverage_mu_numerical += r.cover_mu_numerical ? 1.0 : 0.0;
        out.coverage_beta_analytic += r.cover_beta_analytic ? 1.0 : 0.0;
        out.coverage_beta_numerical += r.cover_beta_numerical ? 1.0 : 0.0;
    }
    if (out.n_converged > 0) {
        const double n = static_cast<double>(out.n_converged);
        out.rmse_mu = std::sqrt(se_mu / n);
        out.rmse_beta = std::sqrt(se_beta / n);
        out.coverage_mu_analytic /= n;
        out.coverage_mu_numerical /= n;
        out.coverage_beta_analytic /= n;
        out.coverage_beta_numerical /= n;
    }
    return out;
}

}  // namespace sumtrunc
