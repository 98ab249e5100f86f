#pragma once

#include <stdexcept>
#include <string>

namespace rcising {

// Invalid input: bad parameters, malformed configuration, violated preconditions.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An exact computation was requested on a graph too large to enumerate.
class OracleSizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A normalising constant vanished (e.g. a source set that no current can realise,
// or a conditioning event of probability zero).
class ZeroMassError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ConfigError(what);
}

}  // namespace rcising
