#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "kahan.hpp"
#include "log_value.hpp"

namespace sumtrunc {

namespace detail {

// exp(a - b) for a <= b, with the subtraction and the exponential carried out
// in extended precision before the single rounding to double.  The double
// difference a - b can itself be off by half an ulp of |a - b|, and exp adds
// another ulp of relative error; both feed straight into the summed value, so
// doing them wide cuts the per-term noise of a log-space accumulation from
// ~1e-16 relative to ~1e-19 (on platforms where long double is plain double
// this degrades gracefully to the narrow behavior).
inline double exp_of_difference(double a, double b) {
    return static_cast<double>(
        std::exp(static_cast<long double>(a) - static_cast<long double>(b)));
}

}  // namespace detail

// log sum exp of a batch of log-scale values, decomposed as
//     lse = max + log1p(residual_sum),
// residual_sum = sum over i != argmax of exp(l_i - max).
// The decomposition is exposed because the residual path is exactly
// shift-invariant: adding a constant c to every input (when the additions are
// representable) leaves `residual_log1p` bit-identical and moves `max` by c.
struct LogSumExpParts {
    double max = log_zero_value;
    double residual_log1p = 0.0;  // log1p(residual_sum)

    double total() const {
        return max == log_zero_value ? log_zero_value : max + residual_log1p;
    }
};

// Exact contract: one occurrence of the maximum is factored out; the remaining
// exp(l_i - max) terms (all in [0, 1]) are summed smallest-first with the
// compensated update, making the result independent of input permutation down
// to the last bit.
inline LogSumExpParts log_sum_exp_parts(std::span<const double> logs) {
    if (logs.empty()) {
        throw std::invalid_argument("log_sum_exp: empty input");
    }
    double max = log_zero_value;
    for (double l : logs) {
        if (std::isnan(l) || l == std::numeric_limits<double>::infinity()) {
            throw std::domain_error("log_sum_exp: inputs must be finite or -inf");
        }
        max = std::max(max, l);
    }
    LogSumExpParts parts;
    parts.max = max;
    if (max == log_zero_value) {  // all terms zero
        parts.residual_log1p = 0.0;
        return parts;
    }
    std::vector<double> rest;
    rest.reserve(logs.size() - 1);
    bool max_taken = false;
    for (double l : logs) {
        if (!max_taken && l == max) {
            max_taken = true;
            continue;
        }
        rest.push_back(detail::exp_of_difference(l, max));
    }
    std::sort(rest.begin(), rest.end());
    CompensatedAccumulator acc;
    for (double e : rest) acc.add(e);
    parts.residual_log1p = std::log1p(acc.value());
    return parts;
}

inline double log_sum_exp(std::span<const double> logs) {
    return log_sum_exp_parts(logs).total();
}

inline LogValue log_sum_exp(std::span<const LogValue> values) {
    std::vector<double> logs;
    logs.reserve(values.size());
    for (LogValue v : values) logs.push_back(v.log());
    return LogValue::from_log(log_sum_exp(std::span<const double>(logs)));
}

// Streaming log-space accumulator for term-by-term series summation.  The
// running sum is kept as scale + log(residual) where `scale` is the largest
// log seen so far and `residual` accumulates exp(l - scale) with the
// compensated update (the log-sum-exp residual and the compensation trick
// folded together).  When a new maximum arrives the residual state is rescaled
// by exp(scale - l) so already-absorbed mass keeps its meaning.
//
// Two properties the rest of the library leans on:
//  * adding an exact zero (or any term whose exp underflows against the
//    current scale and compensation) leaves the state bit-identical, so
//    summing further sub-threshold tail terms is a no-op; and
//  * partial sums are non-decreasing (asserted by callers in log space).
class StreamLogAccumulator {
  public:
    void add(LogValue term) {
        const double l = term.log();
        if (l == log_zero_value) return;
        ++n_terms_;
        if (scale_ == log_zero_value) {
            scale_ = l;
            residual_.add(1.0);
            return;
        }
        if (l <= scale_) {
            const double e = detail::exp_of_difference(l, scale_);
            if (e == 0.0) return;  // underflows against the scale: exact no-op
            residual_.add(e);
        } else {
            residual_.rescale(detail::exp_of_difference(scale_, l));
            residual_.add(1.0);
            scale_ = l;
        }
    }

    LogValue total() const {
        if (scale_ == log_zero_value) return log_zero();
        // Wide until the single rounding at the end: reading the residual as
        // a double costs up to half an ulp of its value, and rounding
        // log(residual) separately costs up to half an ulp of *that* value;
        // either can exceed an ulp of the combined log when |scale| is small.
        const long double log_residual = std::log(residual_.value_wide());
        return LogValue::from_log(static_cast<double>(
            static_cast<long double>(scale_) + log_residual));
    }

    // True when `term` cannot change the state: its linear contribution
    // underflows against the current scale.  Must mirror add() exactly so a
    // true result guarantees a bit-identical state after the add.
    bool would_be_noop(LogValue term) const {
        if (term.is_zero()) return true;
        if (scale_ == log_zero_value) return false;
        return term.log() <= scale_
            && detail::exp_of_difference(term.log(), scale_) == 0.0;
    }

    std::size_t n_terms() const { return n_terms_; }

  private:
    double scale_ = log_zero_value;
    CompensatedAccumulator residual_;
    std::size_t n_terms_ = 0;
};

}  // namespace sumtrunc
