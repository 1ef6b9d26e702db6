#pragma once

// Command dispatch for the rwtree tool and the binary worked example.

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rwtree/bounds.hpp"
#include "rwtree/model.hpp"

namespace rwtree {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,       // runtime error, failed verification or worked-example mismatch
  kExitValidation = 2,
  kExitInapplicable = 3,  // some bound family has no value
  kExitRuntimeCap = 4,    // a replica hit the vertex cap
};

// b = 2, A^(1) = A^(2) = A with P(A = 3/10) = kappa, P(A = 7/2) = 1 - kappa.
EnvSpec worked_example_env(double kappa);

struct ExampleQuantity {
  std::string name;
  double computed = 0.0;
  double closed_form = 0.0;
  double rel_error() const noexcept;
};

struct OmegaRow {
  double a = 0.0;      // atom value of A
  double prob = 0.0;   // its probability
  double to_parent = 0.0;
  double to_child = 0.0;  // each of the two children
};

struct WorkedExample {
  double kappa = 0.0;
  std::vector<OmegaRow> omega;
  std::vector<ExampleQuantity> quantities;  // p0, p1, p2, m1, alpha1, moments
  BoundsReport bounds;                      // psi = 1, p = eps = 1
  double speed_lower = 0.0;

  const ExampleQuantity* find(const std::string& name) const;
};

// Throws ConfigError unless 0 < kappa <= 1/2.
WorkedExample worked_example(double kappa);
nlohmann::json to_json(const WorkedExample& ex);

inline constexpr double kHeadlineSpeed = 0.1229;
inline constexpr double kHeadlineLow = kHeadlineSpeed - 2e-4;
inline constexpr double kHeadlineHigh = kHeadlineSpeed + 6e-4;

// Runs one command line. Reports go to `out` unless --out is given;
// diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rwtree
