#pragma once

#include <stdexcept>
#include <string>

namespace realgrass {

/// Argument outside the mathematical domain of a function (x <= 0 for log Gamma, k > n, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A requested method/size combination that the library does not implement.
class UnsupportedMethod : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iteration cap hit, non-monotone profile, failed minimization.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A direct (non-log) value was requested but is not representable as a double.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

namespace detail {

inline void require_domain(bool ok, const std::string& what)
{
    if (!ok) throw DomainError(what);
}

} // namespace detail
} // namespace realgrass
