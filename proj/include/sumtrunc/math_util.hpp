#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

// Small numeric utilities shared by the series catalog and the statistical
// applications: a cached log-factorial, a normal quantile/CDF pair, the real
// dilogarithm on [0, 1], and simple sample statistics.
namespace sumtrunc {

// log(n!) with a per-thread cache. Entries are std::lgamma(n + 1) computed
// directly (not accumulated), so every entry carries only lgamma's own
// rounding error regardless of n.
inline double log_factorial(std::uint64_t n) {
    thread_local std::vector<double> cache{0.0, 0.0};  // 0! = 1! = 1
    if (n >= cache.size()) {
        std::size_t grown = std::max<std::size_t>(n + 1, cache.size() * 2);
        for (std::size_t k = cache.size(); k < grown; ++k) {
            cache.push_back(std::lgamma(static_cast<double>(k) + 1.0));
        }
    }
    return cache[n];
}

inline double log_binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) throw std::domain_error("log_binomial: k > n");
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

// log Pr(N = n) for Poisson(lambda).
inline double log_poisson_pmf(std::uint64_t n, double lambda) {
    return -lambda + static_cast<double>(n) * std::log(lambda) - log_factorial(n);
}

namespace detail {

// Sum-of-correction-terms part of Stirling's series:
// lgamma(v) = (v - 1/2) log v - v + log(2 pi)/2 + stirling_tail(v).
// Horner in 1/v^2 through the Bernoulli B10 term; for v >= 20 the truncation
// error is below 3e-18 and shrinks further when two tails are differenced.
inline long double stirling_tail(long double v) {
    const long double x = 1.0L / v;
    const long double s = x * x;
    return x * (1.0L / 12.0L
                + s * (-1.0L / 360.0L
                       + s * (1.0L / 1260.0L
                              + s * (-1.0L / 1680.0L + s * (1.0L / 1188.0L)))));
}

// lgamma(z + c) - lgamma(z) computed without forming either lgamma value, so
// the absolute error stays near 1e-17 even when lgamma(z) is in the
// thousands (a direct difference inherits an ulp of the larger value, which
// for z ~ 2000 is ~1e-12, and even in long double ~1e-15).
// Requires z >= 1 and z + c > 0.
//
// Method: split c = k + cr with k integer and |cr| <= 1/2; peel k off as a
// sum of log(z + cr + j); push z above 20 with the recurrence
// G(z) = G(z+1) - log1p(cr/z); evaluate the remaining fractional difference
// by Stirling's series differenced analytically:
//   G(z, cr) = cr log z + (z + cr - 1/2) log1p(cr/z) - cr
//            + stirling_tail(z + cr) - stirling_tail(z).
// Every piece is O(|c| log z), so extended-precision arithmetic on the pieces
// bounds the result's absolute error by ~a few 1e-18 per operation; on
// platforms where long double is plain double the error is ~1e-16 instead.
inline long double log_gamma_ratio_impl(long double z, long double c) {
    const long double k = std::nearbyint(c);
    if (std::abs(k) > 128.0L) {
        return std::lgamma(z + c) - std::lgamma(z);  // large shift: no cancellation to protect
    }
    const long double cr = c - k;  // exact: k = round(c), so c and k share scale

    long double acc = 0.0L;
    if (k >= 1.0L) {
        for (long double j = 0.0L; j < k; j += 1.0L) acc += std::log(z + cr + j);
    } else if (k <= -1.0L) {
        for (long double j = 1.0L; j <= -k; j += 1.0L) acc -= std::log(z + cr - j);
    }
    if (cr == 0.0L) return acc;

    long double zz = z;
    while (zz < 20.0L) {  // G(zz) = G(zz + 1) - log1p(cr / zz)
        acc -= std::log1p(cr / zz);
        zz += 1.0L;
    }
    const long double q = std::log1p(cr / zz);
    return acc + cr * std::log(zz) + (zz + (cr - 0.5L)) * q - cr
         + (stirling_tail(zz + cr) - stirling_tail(zz));
}

// log Pr(Y = y) for the negative binomial, assembled in extended precision so
// callers can add further log-scale pieces before rounding to double once.
// The y-proportional piece uses log1p of a small ratio, so its rounding error
// does not grow with y the way y * (log(mu) - log(mu + phi)) does.
inline long double log_negbin_pmf_impl(std::uint64_t y, double mu, double phi) {
    const long double yd = static_cast<long double>(y);
    const long double mu_l = mu;
    const long double phi_l = phi;
    return log_gamma_ratio_impl(yd + 1.0L, phi_l - 1.0L)  // lgamma(y+phi) - lgamma(y+1)
         - std::lgamma(phi_l)
         - phi_l * std::log1p(mu_l / phi_l)   // phi * log(phi/(mu+phi))
         - yd * std::log1p(phi_l / mu_l);     // y * log(mu/(mu+phi))
}

}  // namespace detail

// lgamma(z + c) - lgamma(z) for z >= 1, z + c > 0, without the cancellation
// error of differencing two large lgamma values: absolute error stays at the
// few-ulp-of-the-result level even when lgamma(z) is in the thousands.
inline double log_gamma_ratio(double z, double c) {
    if (!(z >= 1.0) || !(z + c > 0.0)) {
        throw std::domain_error("log_gamma_ratio: need z >= 1 and z + c > 0");
    }
    return static_cast<double>(
        detail::log_gamma_ratio_impl(static_cast<long double>(z),
                                     static_cast<long double>(c)));
}

// log Pr(Y = y) for the negative binomial in mean-dispersion form:
// Pr(Y=y) = Gamma(y+phi)/(Gamma(phi) y!) (phi/(mu+phi))^phi (mu/(mu+phi))^y.
inline double log_negbin_pmf(std::uint64_t y, double mu, double phi) {
    return static_cast<double>(detail::log_negbin_pmf_impl(y, mu, phi));
}

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline double normal_pdf(double x) {
    const double inv_sqrt_2pi = 0.3989422804014326779399461;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

// Inverse standard normal CDF.  Bisection bracket followed by Newton steps on
// Phi(x) - p; erfc keeps the CDF relatively accurate deep into both tails, so
// the result is accurate to a few ulp even for p near 0 or 1.
inline double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        throw std::domain_error("normal_quantile: p must lie in (0, 1)");
    }
    if (p == 0.5) return 0.0;

    double lo = -45.0, hi = 45.0;
    for (int i = 0; i < 64; ++i) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 4; ++i) {
        const double f = normal_cdf(x) - p;
        const double d = normal_pdf(x);
        if (d == 0.0) break;
        const double step = f / d;
        x -= step;
        if (std::abs(step) <= 1e-16 * std::abs(x)) break;
    }
    return x;
}

// Real dilogarithm Li2(x) for x in [0, 1].  Power series below 1/2; the
// standard reflection Li2(x) + Li2(1-x) = pi^2/6 - ln(x) ln(1-x) above.
inline double dilog(double x) {
    if (!(x >= 0.0) || !(x <= 1.0)) {
        throw std::domain_error("dilog: argument must lie in [0, 1]");
    }
    const double pi_sq_over_6 = 1.6449340668482264;
    if (x == 0.0) return 0.0;
    if (x == 1.0) return pi_sq_over_6;
    const bool reflect = x > 0.5;
    const double y = reflect ? 1.0 - x : x;
    double sum = 0.0, pow = 1.0;
    for (int k = 1; k < 2048; ++k) {
        pow *= y;
        const double term = pow / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    if (!reflect) return sum;
    return pi_sq_over_6 - std::log(x) * std::log1p(-x) - sum;
}

// Type-7 sample quantile (linear interpolation of order statistics), the R
// default.  Takes an unsorted sample by value.
inline double quantile_type7(std::vector<double> sample, double p) {
    if (sample.empty()) throw std::domain_error("quantile_type7: empty sample");
    if (!(p >= 0.0) || !(p <= 1.0)) {
        throw std::domain_error("quantile_type7: p must lie in [0, 1]");
    }
    std::sort(sample.begin(), sample.end());
    const double h = (static_cast<double>(sample.size()) - 1.0) * p;
    const double fl = std::floor(h);
    const std::size_t lo = static_cast<std::size_t>(fl);
    if (lo + 1 >= sample.size()) return sample.back();
    return sample[lo] + (h - fl) * (sample[lo + 1] - sample[lo]);
}

inline double sample_mean(std::span<const double> xs) {
    if (xs.empty()) throw std::domain_error("sample_mean: empty sample");
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Unbiased (n-1 denominator) sample variance.
inline double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) throw std::domain_error("sample_variance: need at least 2 points");
    const double m = sample_mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return ss / (static_cast<double>(xs.size()) - 1.0);
}

}  // namespace sumtrunc
