#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sumtrunc {

// Log of zero. Non-negative quantities are carried as their natural log;
// exact zero is -inf, never NaN.
inline constexpr double log_zero_value = -std::numeric_limits<double>::infinity();

// log(1 - exp(x)) for x <= 0, switching between the two stable branches at
// x = -log 2 (below it, 1 - e^x is computed directly; above it, expm1 keeps
// the cancellation inside the exponential).
inline double log1mexp(double x) {
    if (std::isnan(x) || x > 0.0) {
        throw std::domain_error("log1mexp: argument must be <= 0");
    }
    if (x == 0.0) return log_zero_value;                 // log(1 - 1)
    constexpr double neg_log_2 = -0.6931471805599453094172321214581766;
    if (x > neg_log_2) return std::log(-std::expm1(x));
    return std::log1p(-std::exp(x));
}

// A non-negative real number stored as its natural logarithm.
// Zero is representable (log == -inf); NaN and +inf logs are rejected at
// construction so they cannot propagate through a summation.
class LogValue {
  public:
    constexpr LogValue() = default;  // zero

    static LogValue from_log(double log_x) {
        if (std::isnan(log_x) || log_x == std::numeric_limits<double>::infinity()) {
            throw std::domain_error("LogValue: log must be finite or -inf");
        }
        LogValue v;
        v.log_ = log_x;
        return v;
    }

    static LogValue from_linear(double x) {
        if (std::isnan(x) || x < 0.0) {
            throw std::domain_error("LogValue: linear value must be >= 0");
        }
        return from_log(x == 0.0 ? log_zero_value : std::log(x));
    }

    double log() const { return log_; }
    double linear() const { return std::exp(log_); }
    bool is_zero() const { return log_ == log_zero_value; }

    friend bool operator==(LogValue a, LogValue b) { return a.log_ == b.log_; }
    friend bool operator!=(LogValue a, LogValue b) { return a.log_ != b.log_; }
    friend bool operator<(LogValue a, LogValue b) { return a.log_ < b.log_; }
    friend bool operator<=(LogValue a, LogValue b) { return a.log_ <= b.log_; }
    friend bool operator>(LogValue a, LogValue b) { return a.log_ > b.log_; }
    friend bool operator>=(LogValue a, LogValue b) { return a.log_ >= b.log_; }

  private:
    double log_ = log_zero_value;
};

inline LogValue log_zero() { return LogValue{}; }
inline LogValue log_one() { return LogValue::from_log(0.0); }

// a + b without leaving log space.
inline LogValue log_add(LogValue a, LogValue b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const double hi = std::max(a.log(), b.log());
    const double lo = std::min(a.log(), b.log());
    return LogValue::from_log(hi + std::log1p(std::exp(lo - hi)));
}

// a - b without leaving log space; requires a >= b.
inline LogValue log_diff(LogValue a, LogValue b) {
    if (a < b) {
        throw std::domain_error("log_diff: minuend smaller than subtrahend");
    }
    if (b.is_zero()) return a;
    if (a.log() == b.log()) return log_zero();
    return LogValue::from_log(a.log() + log1mexp(b.log() - a.log()));
}

// |a - b| in log space (order-free variant used for error evaluation).
inline LogValue log_abs_diff(LogValue a, LogValue b) {
    return a >= b ? log_diff(a, b) : log_diff(b, a);
}

}  // namespace sumtrunc
