#pragma once

#include <stdexcept>
#include <string>

namespace gini {

// Malformed or unreadable input files.
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied configuration (hyper-parameters, grids, fold counts).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arguments outside the mathematical domain of an operation.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gini
