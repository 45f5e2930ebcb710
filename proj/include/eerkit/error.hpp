#pragma once

#include <stdexcept>

namespace eerkit {

/// Raised for invalid data, failed validation, and I/O problems.
/// The CLI maps these to exit status 2; usage errors are status 1.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eerkit
