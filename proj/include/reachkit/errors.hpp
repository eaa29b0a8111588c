#pragma once

#include <stdexcept>
#include <string>

namespace reachkit {

// Out-of-range cell index.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// A query outside the state domain or an input outside its admissible box.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Two fields or masks that do not live on the same grid.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid solver or run configuration (including CFL violations).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A constrained problem with no admissible policy for some task.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed artifact on disk.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace reachkit
