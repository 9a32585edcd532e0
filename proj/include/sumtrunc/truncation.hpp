#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "log_sum_exp.hpp"
#include "log_value.hpp"
#include "series.hpp"

// Adaptive truncation of convergent non-negative series, evaluated entirely in
// log space.  Three rules with error guarantees are provided:
//
//  * sum_to_threshold: accumulate until the current term falls below
//    eps' = eps (1-M)/M in the decreasing regime; the remainder is then below
//    eps' * M/(1-M) = eps whenever the term ratios stay below M.
//  * error_bounding_pairs: maintain the two-sided remainder bracket built from
//    the ratio limit L and the observed ratio, stop when its half-width drops
//    below eps, return the bracket midpoint (for L = 0 the half-width test is
//    algebraically the relative test a_{n-1}/a_n - 1 > a_n/(2 eps)).
//  * batches: accumulate blocks of N terms and stop when a block sum Delta_j
//    falls below eps and the end-of-block ratio is at most
//    Delta_j / (a_end + Delta_j); valid whenever N > L/(1-L).
//
// plus a fixed evaluation cap with no error estimate.  All methods share one
// streaming compensated accumulator and consume terms in index order, so two
// methods that stop at different points agree bitwise on every bit the shorter
// run could have produced (sub-threshold tail terms are exact no-ops).
namespace sumtrunc {

namespace detail {

// a_cur / a_prev with the zero conventions: 0/0 -> 0 (dead tail),
// x/0 -> +inf (pre-mode jump from an exactly-zero term).
inline double term_ratio(LogValue prev, LogValue cur) {
    if (cur.is_zero()) return 0.0;
    if (prev.is_zero()) return std::numeric_limits<double>::infinity();
    return std::exp(cur.log() - prev.log());
}

inline void check_common(const TruncationConfig& config) {
    if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) {
        throw config_error("epsilon must be a positive finite number");
    }
    if (config.max_terms < 2) {
        throw config_error("max_terms must be at least 2");
    }
}

inline void check_adaptive(const SeriesSpec& series) {
    if (!series.log_term) {
        throw config_error("series has no term function");
    }
    if (series.ratio_limit) {
        const double l = *series.ratio_limit;
        if (!(l >= 0.0)) {
            throw config_error("ratio limit must be non-negative");
        }
        if (l >= 1.0) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", l);
            throw unsupported_series(
                "ratio limit L=" + std::string(buf) +
                " unsupported: adaptive truncation requires L < 1");
        }
    }
}

// log(1/(1-r)) for a ratio r in [0, 1); +inf when r >= 1 is handled by callers.
inline double log_geom_factor(double r) { return -std::log1p(-r); }

}  // namespace detail

// Smallest batch size the batches guarantee prescribes for a known ratio
// limit: N = max(2, ceil(L/(1-L)) + 1), which always satisfies N > L/(1-L).
inline std::uint64_t min_batch_size(double ratio_limit) {
    if (!(ratio_limit >= 0.0) || ratio_limit >= 1.0) {
        throw config_error("min_batch_size requires a ratio limit in [0, 1)");
    }
    const double q = ratio_limit / (1.0 - ratio_limit);
    const double n = std::ceil(q) + 1.0;
    return std::max<std::uint64_t>(2, static_cast<std::uint64_t>(n));
}

// Sum-to-threshold rule.  Stops at the first term below eps' once the terms
// have started decreasing (the decrease guard covers series whose terms rise
// to a mode first; while the terms grow the stop cannot trigger, which is the
// "first term already above eps" shortcut done inline).  threshold_m enters
// through eps' = eps (1-M)/M; the remainder guarantee S - S_n < eps holds
// whenever the tail ratios stay below M.
inline TruncationResult sum_to_threshold(const SeriesSpec& series, const TruncationConfig& config) {
    detail::check_common(config);
    detail::check_adaptive(series);
    const double m = config.threshold_m;
    if (!(m > 0.0) || !(m < 1.0)) {
        throw config_error("threshold_m must lie in (0, 1)");
    }
    const double log_eps_prime = std::log(config.epsilon) + std::log1p(-m) - std::log(m);

    TruncationResult result;
    result.method_used = Method::SumToThreshold;

    StreamLogAccumulator sum;
    std::uint64_t n = series.index_offset;
    LogValue prev = series.log_term(n++);
    result.n_evaluations = 1;
    sum.add(prev);

    while (result.n_evaluations < config.max_terms) {
        const LogValue cur = series.log_term(n++);
        ++result.n_evaluations;
        sum.add(cur);
        result.final_ratio = detail::term_ratio(prev, cur);
        // Strict stop: term below eps' *and* the decreasing regime entered.
        if (cur.log() < log_eps_prime && cur <= prev) {
            result.converged = true;
            break;
        }
        prev = cur;
    }
    result.log_sum = sum.total();
    return result;
}

// Error-bounding-pairs rule.  Requires a known ratio limit L in [0, 1).  At
// each decreasing step the remainder past S_{n-1} is bracketed by
// a_n/(1-L) and a_n/(1 - a_n/a_{n-1}); when the bracket half-width
// (a_n/2)|1/(1-L) - 1/(1-r)| drops below eps the bracket midpoint is added,
// so |S - returned| <= half-width < eps.
inline TruncationResult error_bounding_pairs(const SeriesSpec& series, const TruncationConfig& config) {
    detail::check_common(config);
    detail::check_adaptive(series);
    if (!series.ratio_limit) {
        throw config_error("error_bounding_pairs requires a known ratio limit");
    }
    const double ratio_limit = *series.ratio_limit;
    const double log_eps = std::log(config.epsilon);
    const double log_half = -0.6931471805599453094172321214581766;  // log(1/2)
    const double u = detail::log_geom_factor(ratio_limit);          // log 1/(1-L)

    TruncationResult result;
    result.method_used = Method::ErrorBoundingPairs;

    StreamLogAccumulator sum_before;  // S_{n-1}: excludes the current term
    std::uint64_t n = series.index_offset;
    LogValue prev = series.log_term(n++);
    LogValue cur = series.log_term(n++);
    result.n_evaluations = 2;
    sum_before.add(prev);

    while (true) {
        if (cur <= prev) {  // decreasing regime: the bracket is valid
            const double r = detail::term_ratio(prev, cur);
            result.final_ratio = r;
            if (r < 1.0) {
                const double v = detail::log_geom_factor(r);  // log 1/(1-r)
                const LogValue spread =
                    log_abs_diff(LogValue::from_log(u), LogValue::from_log(v));
                const LogValue half_width = cur.is_zero() || spread.is_zero()
                    ? log_zero()
                    : LogValue::from_log(cur.log() + log_half + spread.log());
                if (half_width.log() < log_eps) {
                    const double brackets = log_add(LogValue::from_log(u),
                                                    LogValue::from_log(v)).log();
                    if (!cur.is_zero()) {
                        sum_before.add(LogValue::from_log(cur.log() + log_half + brackets));
                    }
                    result.bound_halfwidth = half_width;
                    result.converged = true;
                    result.log_sum = sum_before.total();
                    return result;
                }
            }
        }
        if (result.n_evaluations >= config.max_terms) break;
        sum_before.add(cur);
        prev = cur;
        cur = series.log_term(n++);
        ++result.n_evaluations;
    }
    sum_before.add(cur);  // cap hit: return the plain partial sum
    result.log_sum = sum_before.total();
    return result;
}

// Batches rule.  Delta_1 spans indices [i0, i0+N] (N+1 terms); every later
// batch spans N indices.  After batch j >= 2 the run stops when
// Delta_j < eps and a_end/a_prev <= Delta_j/(a_end + Delta_j); both checks are
// evaluated (the second is cheap in log space even though it is often skipped
// in practice).  The guarantee needs N > L/(1-L).  Batch sums are evaluated
// by the ascending-sorted kernel; the running total streams in index order.
inline TruncationResult batches(const SeriesSpec& series, const TruncationConfig& config) {
    detail::check_common(config);
    detail::check_adaptive(series);
    const std::uint64_t batch = config.batch_size;
    if (batch < 2) {
        throw config_error("batch_size must be at least 2");
    }

    TruncationResult result;
    result.method_used = Method::Batches;

    StreamLogAccumulator sum;
    std::uint64_t n = series.index_offset;
    std::vector<double> block_logs;
    block_logs.reserve(batch + 1);

    LogValue prev = log_zero();
    LogValue cur = log_zero();
    bool first_batch = true;

    while (result.n_evaluations < config.max_terms) {
        const std::uint64_t block_len =
            std::min<std::uint64_t>(first_batch ? batch + 1 : batch,
                                    config.max_terms - result.n_evaluations);
        block_logs.clear();
        for (std::uint64_t i = 0; i < block_len; ++i) {
            prev = cur;
            cur = series.log_term(n++);
            ++result.n_evaluations;
            sum.add(cur);
            block_logs.push_back(cur.log());
        }
        if (block_len < (first_batch ? batch + 1 : batch)) break;  // cap mid-batch
        result.final_ratio = detail::term_ratio(prev, cur);
        // The first block (indices i0..i0+N) is never a checkpoint; from the
        // second block on, continue while Delta_j >= eps or the end-of-block
        // ratio exceeds Delta/(a_end + Delta).
        if (!first_batch) {
            const LogValue delta =
                LogValue::from_log(log_sum_exp(std::span<const double>(block_logs)));
            const bool delta_small = delta.log() < std::log(config.epsilon);
            const double lhs = cur.is_zero() && prev.is_zero()
                ? log_zero_value
                : (prev.is_zero() ? std::numeric_limits<double>::infinity()
                                  : cur.log() - prev.log());
            const double rhs = delta.is_zero()
                ? log_zero_value
                : delta.log() - log_add(cur, delta).log();
            if (delta_small && !(lhs > rhs)) {
                result.converged = true;
                break;
            }
        }
        first_batch = false;
    }
    result.log_sum = sum.total();
    return result;
}

// Fixed evaluation cap: sums exactly cap_k + 1 terms (indices i0 .. i0+K).
// Always "converges" by construction and carries no error estimate.
inline TruncationResult fixed_cap(const SeriesSpec& series, const TruncationConfig& config) {
    if (!series.log_term) {
        throw config_error("series has no term function");
    }
    TruncationResult result;
    result.method_used = Method::FixedCap;
    StreamLogAccumulator sum;
    LogValue prev = log_zero();
    LogValue cur = log_zero();
    for (std::uint64_t i = 0; i <= config.cap_k; ++i) {
        prev = cur;
        cur = series.log_term(series.index_offset + i);
        ++result.n_evaluations;
        sum.add(cur);
    }
    if (config.cap_k >= 1) result.final_ratio = detail::term_ratio(prev, cur);
    result.converged = true;
    result.log_sum = sum.total();
    return result;
}

// Value a fixed cap of `cap` + 1 terms would produce, skipping the provably
// inert tail: once the terms are decreasing and a long run of them underflows
// against the accumulated scale, every further add is an exact no-op for a
// series that keeps decreasing, so the result is bit-identical to the full
// loop.  Intended for unimodal catalog series where it serves as the
// Appendix-C style reference sum S_M without paying for dead iterations.
inline LogValue capped_reference(const SeriesSpec& series, std::uint64_t cap) {
    StreamLogAccumulator sum;
    LogValue prev = log_zero();
    std::uint64_t inert_run = 0;
    for (std::uint64_t i = 0; i <= cap; ++i) {
        const LogValue cur = series.log_term(series.index_offset + i);
        if (i > 0 && cur <= prev && sum.would_be_noop(cur)) {
            if (++inert_run >= 64) break;
        } else {
            inert_run = 0;
        }
        sum.add(cur);
        prev = cur;
    }
    return sum.total();
}

// Chooses a guaranteed method from what is known about the ratio limit:
// L < 0.5 -> sum-to-threshold with M = 0.5 (or the configured M when it still
// dominates L); 0.5 <= L < 1 -> batches with N at least the guarantee size;
// unknown L -> batches with N = 100 (covers every L < 0.99).
inline TruncationResult auto_dispatch(const SeriesSpec& series, const TruncationConfig& config) {
    detail::check_common(config);
    detail::check_adaptive(series);
    TruncationConfig dispatched = config;
    if (!series.ratio_limit) {
        dispatched.batch_size = std::max<std::uint64_t>(config.batch_size, 100);
        return batches(series, dispatched);
    }
    const double ratio_limit = *series.ratio_limit;
    if (ratio_limit < 0.5) {
        if (!(dispatched.threshold_m > ratio_limit)) dispatched.threshold_m = 0.5;
        return sum_to_threshold(series, dispatched);
    }
    dispatched.batch_size = std::max(config.batch_size, min_batch_size(ratio_limit));
    return batches(series, dispatched);
}

inline TruncationResult truncate(const SeriesSpec& series, const TruncationConfig& config) {
    switch (config.method) {
        case Method::SumToThreshold: return sum_to_threshold(series, config);
        case Method::ErrorBoundingPairs: return error_bounding_pairs(series, config);
        case Method::Batches: return batches(series, config);
        case Method::FixedCap: return fixed_cap(series, config);
        case Method::Auto: return auto_dispatch(series, config);
    }
    throw config_error("unknown truncation method");
}

// Proposition-1 bounding pair after summing terms i0..n: the remainder lies
// between a_{n+1}/(1-L) and a_{n+1}/(1 - a_{n+1}/a_n) (which side is which
// depends on the direction the ratios approach L from; the interval below is
// ordered numerically, which covers both cases).  Requires the decreasing
// regime at n+1.
inline BoundingPair bounding_pair(const SeriesSpec& series, std::uint64_t n,
                                  const TruncationConfig& config = {}) {
    detail::check_adaptive(series);
    if (!series.ratio_limit) {
        throw config_error("bounding_pair requires a known ratio limit");
    }
    if (n < series.index_offset) {
        throw config_error("bounding_pair: n precedes the first series index");
    }
    (void)config;
    const double ratio_limit = *series.ratio_limit;
    StreamLogAccumulator sum;
    LogValue prev = log_zero();
    LogValue cur = log_zero();
    BoundingPair pair;
    for (std::uint64_t i = series.index_offset; i <= n + 1; ++i) {
        prev = cur;
        cur = series.log_term(i);
        ++pair.n_evaluations;
        if (i <= n) sum.add(cur);
    }
    const double r = detail::term_ratio(prev, cur);  // a_{n+1} / a_n
    if (!(r < 1.0)) {
        throw std::domain_error("bounding_pair: terms are not yet decreasing at n+1");
    }
    const LogValue partial = sum.total();
    const LogValue with_limit = cur.is_zero()
        ? partial
        : log_add(partial, LogValue::from_log(cur.log() + detail::log_geom_factor(ratio_limit)));
    const LogValue with_ratio = cur.is_zero()
        ? partial
        : log_add(partial, LogValue::from_log(cur.log() + detail::log_geom_factor(r)));
    pair.lower = std::min(with_limit, with_ratio);
    pair.upper = std::max(with_limit, with_ratio);
    return pair;
}

// Mode split for series whose terms rise before they decay.  Scans until the
// term ratio drops below 1 and stays there for one look-ahead step; returns
// the exactly-summed head, the tail spec starting at the split, and the first
// term (whose comparison against eps lets callers skip the scan entirely when
// the first term already dominates the tolerance).
struct SplitResult {
    LogValue head_log_sum;           // sum of terms before the tail start
    SeriesSpec tail;                 // same series, index_offset at the split
    std::uint64_t split_index = 0;   // first tail index
    std::uint64_t n_evaluations = 0;
    LogValue first_term;

    bool first_term_exceeds(double epsilon) const {
        return first_term.log() > std::log(epsilon);
    }
};

struct probe_limit_exhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline SplitResult split_at_tail(const SeriesSpec& series, std::uint64_t probe_limit = 100000) {
    if (!series.log_term) {
        throw config_error("series has no term function");
    }
    SplitResult result;
    std::vector<double> head_logs;
    std::uint64_t n = series.index_offset;
    LogValue prev = series.log_term(n++);
    LogValue cur = series.log_term(n++);
    result.n_evaluations = 2;
    result.first_term = prev;

    // Find the first index m with a_m < a_{m-1} confirmed by a_{m+1} < a_m.
    while (true) {
        if (result.n_evaluations > probe_limit) {
            throw probe_limit_exhausted("split_at_tail: no decreasing tail within probe limit");
        }
        if (cur < prev) {
            const LogValue next = series.log_term(n);
            ++result.n_evaluations;
            if (next < cur) {
                const std::uint64_t m = n - 1;  // index of `cur`
                if (m == series.index_offset + 1) {
                    // Decreasing from the start: empty head, tail at i0.
                    result.split_index = series.index_offset;
                    result.head_log_sum = log_zero();
                } else {
                    result.split_index = m;
                    head_logs.push_back(prev.log());
                    result.head_log_sum =
                        LogValue::from_log(log_sum_exp(std::span<const double>(head_logs)));
                }
                result.tail = series;
                result.tail.index_offset = result.split_index;
                return result;
            }
            // False alarm: `next` interrupts the decrease; keep scanning.
            head_logs.push_back(prev.log());
            prev = cur;
            cur = next;
            ++n;
            continue;
        }
        head_logs.push_back(prev.log());
        prev = cur;
        cur = series.log_term(n++);
        ++result.n_evaluations;
    }
}

// Robust error between two log-scale sums: exp of the log-space difference of
// the larger and smaller log (0 when the logs agree bitwise).
inline double robust_error(LogValue a, LogValue b) {
    return log_abs_diff(a, b).linear();
}

}  // namespace sumtrunc
