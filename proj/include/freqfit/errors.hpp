#pragma once

#include <stdexcept>
#include <string>

namespace freqfit {

// Thrown when an iterative numeric procedure fails to converge or a
// matrix operation cannot be completed (singular / not positive definite).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown by CSV readers on malformed input; the message names row/column.
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Non-convergence of a fit; carries the last iterate so callers can inspect it.
class fit_error : public numeric_error {
 public:
  fit_error(const std::string& what, double last_iterate)
      : numeric_error(what), last_iterate_(last_iterate) {}
  double last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_iterate_;
};

}  // namespace freqfit
