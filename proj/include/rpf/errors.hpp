#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rpf {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input (wrong shapes, bad words, bad ratios...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A mathematical precondition of the requested operation does not hold,
/// e.g. the time potential is not eventually positive.
class PreconditionError : public InputError {
 public:
  using InputError::InputError;
};

/// The input is well formed but outside what the implementation can handle
/// with a certified answer (e.g. a tail that cannot be bounded).
class UnsupportedInput : public InputError {
 public:
  using InputError::InputError;
};

/// The caller asked for the asymptote of the wrong regime
/// (non-lattice formula on lattice data or vice versa).
class WrongTheorem : public InputError {
 public:
  using InputError::InputError;
};

/// A graph-level impossibility, e.g. no directed cycle.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Iterative method failed to converge, or produced an inconsistent result.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Monte-Carlo horizon too short to cover the requested time.
class HorizonError : public InputError {
 public:
  HorizonError(const std::string& what, std::int64_t suggested)
      : InputError(what), suggested_n_max(suggested) {}
  std::int64_t suggested_n_max;
};

}  // namespace rpf
