#pragma once

#include <stdexcept>
#include <string>

namespace nlsscat {

/// Invalid user input: parameters, grid sizes, files, configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical stage could not produce a trustworthy result
/// (stability condition violated, singular system, rank deficiency).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nlsscat
