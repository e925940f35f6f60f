#ifndef FUGLEDE_ERRORS_HPP
#define FUGLEDE_ERRORS_HPP

#include <stdexcept>

namespace fuglede {

/// Malformed arguments to library calls (size mismatches, bad moduli, broken preconditions).
class InputError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// A catalog, cache, or report record could not be read.
class ParseError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A record parsed but its contents break a domain invariant.
class ValidationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// An alleged counterexample failed one of the log-Hadamard checks.
class VerificationError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fuglede

#endif  // FUGLEDE_ERRORS_HPP
