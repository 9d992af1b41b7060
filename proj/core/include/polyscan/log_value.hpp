#pragma once

#include <cmath>
#include <compare>

namespace polyscan {

// A positive quantity stored as its natural log. Evidences and Bayes factors
// live in this representation end to end; exponentiation happens only when a
// linear value is reported (a_{2n}^{a_{1n}} Gamma(a_{1n}) overflows double
// well before n reaches the thousands).
class LogValue {
public:
    LogValue() = default;

    static LogValue from_log(double log_magnitude) { return LogValue(log_magnitude); }

    static LogValue from_linear(double value) { return LogValue(std::log(value)); }

    double log() const noexcept { return log_; }

    // May overflow/underflow to inf/0 for extreme magnitudes; that is the
    // caller's reporting problem, not an arithmetic one.
    double linear() const noexcept { return std::exp(log_); }

    friend LogValue operator*(LogValue a, LogValue b) { return LogValue(a.log_ + b.log_); }
    friend LogValue operator/(LogValue a, LogValue b) { return LogValue(a.log_ - b.log_); }

    friend auto operator<=>(LogValue a, LogValue b) { return a.log_ <=> b.log_; }
    friend bool operator==(LogValue a, LogValue b) { return a.log_ == b.log_; }

private:
    explicit LogValue(double lg) : log_(lg) {}
    double log_ = 0.0;
};

} // namespace polyscan
