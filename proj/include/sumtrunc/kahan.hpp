#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sumtrunc {

// Compensated (Kahan) accumulator.  The update is the classic four-statement
// form:
//     Y <- x - C;  T <- S + Y;  C <- (T - S) - Y;  S <- T
// where the minuend of the compensation line is the updated total T and the
// subtrahend the previous total S.  For N summands the running total satisfies
// |S - sum| / |sum| <= (2u + O(N u^2)) * cond, with u the unit roundoff and
// cond the condition number of the sum (== 1 for non-negative summands).
struct CompensatedAccumulator {
    double sum = 0.0;
    double compensation = 0.0;

    void add(double x) {
        const double y = x - compensation;
        const double t = sum + y;
        compensation = (t - sum) - y;
        sum = t;
    }

    // Recovered total.  `compensation` holds the negative of the deficit left
    // in `sum`, so subtracting it restores the low-order bits.
    double value() const { return sum - compensation; }

    // The same total without the rounding to double: (sum, -compensation) is
    // a two-term representation carrying more bits than one double, and
    // consumers that keep computing (e.g. take a log) lose up to half an ulp
    // of `sum` by reading the rounded view instead.
    long double value_wide() const {
        return static_cast<long double>(sum) - static_cast<long double>(compensation);
    }

    // Exact-in-spirit multiplication of the accumulated state by f >= 0,
    // used when a running maximum is re-based.
    void rescale(double f) {
        sum *= f;
        compensation *= f;
    }
};

inline void kahan_add(CompensatedAccumulator& acc, double x) { acc.add(x); }

// Sum of non-negative doubles, smallest magnitude first, with the compensated
// update.  Negative or NaN input is a domain error.
inline double sorted_compensated_sum(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    for (double v : sorted) {
        if (std::isnan(v) || v < 0.0) {
            throw std::domain_error("sorted_compensated_sum: values must be non-negative");
        }
    }
    std::sort(sorted.begin(), sorted.end());
    CompensatedAccumulator acc;
    for (double v : sorted) acc.add(v);
    return acc.value();
}

// Condition number of a sum, sum|x| / |sum x|; equals 1 exactly for
// non-negative summands.  Internal accumulation in extended precision so the
// quantity itself is trustworthy.
struct ConditionNumber {
    double value = 1.0;

    static ConditionNumber of(std::span<const double> values) {
        long double abs_sum = 0.0L;
        long double sum = 0.0L;
        for (double v : values) {
            if (std::isnan(v)) throw std::domain_error("ConditionNumber: NaN input");
            abs_sum += std::fabs(static_cast<long double>(v));
            sum += static_cast<long double>(v);
        }
        ConditionNumber c;
        if (abs_sum == 0.0L) {
            c.value = 1.0;
        } else if (sum == 0.0L) {
            c.value = std::numeric_limits<double>::infinity();
        } else {
            c.value = static_cast<double>(abs_sum / std::fabs(sum));
        }
        return c;
    }
};

}  // namespace sumtrunc
