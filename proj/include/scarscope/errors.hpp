#pragma once

#include <stdexcept>
#include <string>

namespace scarscope {

// Invalid arguments, out-of-range model parameters, mismatched bases.
class usage_error : public std::invalid_argument {
 public:
  explicit usage_error(const std::string& what) : std::invalid_argument(what) {}
};

// Propagator / solver failed to converge within its budget.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace scarscope
