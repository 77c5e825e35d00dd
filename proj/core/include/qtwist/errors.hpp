#pragma once

#include <stdexcept>
#include <string>

namespace qtwist {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A Hecke eigenvalue was requested beyond the loaded range of a form.
class MissingCoefficient : public Error {
 public:
  MissingCoefficient(unsigned long long prime, unsigned long long limit)
      : Error("missing Hecke eigenvalue at p=" + std::to_string(prime) +
              " (coefficients loaded up to " + std::to_string(limit) + ")"),
        prime_(prime) {}
  unsigned long long prime() const noexcept { return prime_; }

 private:
  unsigned long long prime_;
};

/// Malformed input file or record. The message names the offending field or line.
class ParseError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

/// A numerical invariant gate failed (CLI maps this to exit status 2).
class GateFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace qtwist
