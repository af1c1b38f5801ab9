#pragma once

#include <stdexcept>
#include <string>

#include "dcpf/types.hpp"

namespace dcpf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A standing assumption of the dynamics (balanced, connected graph, feasible
/// start, convex costs) does not hold.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or an iterative solver that failed to converge.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

inline void require_dim(Index got, Index want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(want) +
                         ", got " + std::to_string(got));
  }
}

}  // namespace dcpf
