#pragma once

#include <stdexcept>
#include <string>

namespace kirchhoff {

/// Invalid arguments or configuration (CLI exit code 2).
class SpecError : public std::invalid_argument {
public:
    explicit SpecError(const std::string& what) : std::invalid_argument(what) {}
};

/// File or stream failure (CLI exit code 3).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Mass would leave the truncated domain during a fiber rescaling.
class TruncationLoss : public std::runtime_error {
public:
    TruncationLoss(const std::string& what, double lost_fraction)
        : std::runtime_error(what), lost_fraction_(lost_fraction) {}
    double lost_fraction() const noexcept { return lost_fraction_; }

private:
    double lost_fraction_;
};

/// exp(alpha u^2) argument beyond the representable range.
class RangeError : public std::overflow_error {
public:
    explicit RangeError(const std::string& what) : std::overflow_error(what) {}
};

/// A structural hypothesis of a formula is violated (e.g. nonpositive bracket).
class HypothesisViolation : public std::domain_error {
public:
    explicit HypothesisViolation(const std::string& what) : std::domain_error(what) {}
};

/// Iterative numerical procedure failed to converge or to bracket.
class NumericalFailure : public std::runtime_error {
public:
    explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kirchhoff
