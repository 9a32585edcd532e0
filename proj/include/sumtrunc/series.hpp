#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "log_value.hpp"

namespace sumtrunc {

// Configuration / usage errors (bad tolerance, malformed parameters, ...).
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// The series violates a method's applicability conditions (e.g. ratio limit
// L >= 1, for which no adaptive guarantee exists).
struct unsupported_series : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Behaviour of the term-ratio sequence a_{n+1}/a_n as n grows.
enum class RatioDirection {
    DecreasesToLimit,  // ratios fall towards L (Poisson-like tails)
    IncreasesToLimit,  // ratios rise towards L (power-series-like tails)
    Unknown,
};

// A convergent series of non-negative terms, described in log space.
// `log_term(n)` is log a_n for the absolute index n; the sum runs over
// n = index_offset, index_offset + 1, ...  Terms may be exactly zero
// (LogValue zero); the ratio limit L = lim a_{n+1}/a_n is optional.
struct SeriesSpec {
    std::function<LogValue(std::uint64_t)> log_term;
    std::optional<double> ratio_limit;
    RatioDirection ratio_direction = RatioDirection::Unknown;
    std::uint64_t index_offset = 0;
};

enum class Method {
    SumToThreshold,
    ErrorBoundingPairs,
    Batches,
    FixedCap,
    Auto,
};

inline const char* method_name(Method m) {
    switch (m) {
        case Method::SumToThreshold: return "threshold";
        case Method::ErrorBoundingPairs: return "error_bounding_pairs";
        case Method::Batches: return "batches";
        case Method::FixedCap: return "fixed_cap";
        case Method::Auto: return "auto";
    }
    return "unknown";
}

struct TruncationConfig {
    Method method = Method::Auto;
    // Requested absolute error bound on the sum.
    double epsilon = std::numeric_limits<double>::epsilon();
    // Ratio threshold M of the sum-to-threshold rule; the stopping tolerance
    // is adjusted to eps' = eps (1 - M)/M so the remainder bound stays eps.
    double threshold_m = 0.5;
    // Batch size N for the batches method (guarantee needs N > L/(1-L)).
    std::uint64_t batch_size = 40;
    // Hard cap on term evaluations for the adaptive methods; exhausting it
    // yields converged = false, never an exception.
    std::uint64_t max_terms = 100000;
    // Number of terms beyond the first for the fixed-cap method (K + 1 terms).
    std::uint64_t cap_k = 1000;
};

struct TruncationResult {
    LogValue log_sum;
    std::uint64_t n_evaluations = 0;  // term-function calls, initializers included
    bool converged = false;
    Method method_used = Method::Auto;
    // Last observed term ratio a_n / a_{n-1} (NaN before two terms are seen).
    double final_ratio = std::numeric_limits<double>::quiet_NaN();
    // Half-width of the bounding interval (error-bounding pairs only).
    std::optional<LogValue> bound_halfwidth;
};

// Proposition-1 style interval trapping the true sum S:
//   S_n + a_{n+1}/(1-L)  and  S_n + a_{n+1}/(1 - a_{n+1}/a_n),
// ordered by which side the ratio sequence approaches L from.
struct BoundingPair {
    LogValue lower;
    LogValue upper;
    std::uint64_t n_evaluations = 0;
};

}  // namespace sumtrunc
