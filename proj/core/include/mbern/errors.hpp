#pragma once

#include <stdexcept>

namespace mbern {

// Base of every error thrown by the library. Callers that only care about
// "something in mbern failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite entries or asymmetry beyond the construction tolerance.
class InvalidMatrix : public Error {
 public:
  using Error::Error;
};

// A function was evaluated outside the set where it is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NotPSD : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Bound parameters violate their documented invariants.
class InvalidRequest : public Error {
 public:
  using Error::Error;
};

// Ensemble description is inconsistent (probabilities, mean, norm caps).
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

// No closed-form moment is available for this ensemble family.
class NotExact : public Error {
 public:
  using Error::Error;
};

class NoFiniteNorm : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration would exceed the outcome budget.
class OutcomeExplosion : public Error {
 public:
  using Error::Error;
};

}  // namespace mbern
