#pragma once

#include <stdexcept>
#include <string>

namespace bnpreg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside an operation's mathematical domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid or inconsistent configuration (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for the given basis or representation.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Factorization or other floating-point failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// MCMC sampler reached an impossible state; message carries a state dump.
class SamplerError : public Error {
 public:
  using Error::Error;
};

}  // namespace bnpreg
