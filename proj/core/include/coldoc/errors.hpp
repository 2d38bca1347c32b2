#pragma once

#include <stdexcept>

namespace coldoc {

/// Invalid configuration or command-line usage. CLI exit code 2.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input/output data. CLI exit code 3.
class data_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss. CLI exit code 4.
class divergence_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace coldoc
