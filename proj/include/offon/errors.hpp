#pragma once

#include <stdexcept>
#include <string>

namespace offon {

// Raised when a factorization fails on a matrix that should be SPD.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace offon
