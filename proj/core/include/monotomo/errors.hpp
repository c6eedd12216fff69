#pragma once

#include <stdexcept>
#include <string>

namespace monotomo {

/// Factorization breakdown or non-finite values in a linear solve.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Newton iteration hit max_iter without reaching the tolerance.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, double last_residual, int iterations)
      : std::runtime_error(what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

/// No admissible scaling factor within the halving budget.
class SelectionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulated reading beyond the largest instrument range.
class RangeOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Expected input file or directory is absent or unreadable.
class MissingArtifact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace monotomo
