#pragma once
// Exception hierarchy shared by every module. The CLI maps each class to an exit code.

#include <stdexcept>
#include <string>

namespace isac_thz {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function.
struct domain_error : error {
  using error::error;
};

// Parameter set violates a documented invariant. The message names the invariant.
struct validation_error : error {
  using error::error;
};

struct parse_error : error {
  using error::error;
};

// Requirements that no integer pattern can satisfy.
struct infeasible_error : error {
  using error::error;
};

// Quadrature or series failed to converge. Carries what it had when it gave up.
struct convergence_error : error {
  double partial_value;
  double error_bound;
  convergence_error(const std::string& what, double partial, double bound)
      : error(what + " (partial " + std::to_string(partial) + ", bound " +
              std::to_string(bound) + ")"),
        partial_value(partial),
        error_bound(bound) {}
};

}  // namespace isac_thz
