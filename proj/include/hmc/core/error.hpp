#pragma once

#include <stdexcept>
#include <string>

namespace hmc {

// Error categories map one-to-one onto CLI exit codes (1, 2, 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hmc
