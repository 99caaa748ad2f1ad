#pragma once
#include <stdexcept>
#include <string>

namespace fracvirial {

// Error taxonomy maps onto the CLI exit codes:
//   invalid_input / construction failures -> 2 (usage/config)
//   quadrature / instability              -> 3 (numerical abort)
//   check failures (suites)               -> 1

struct invalid_input : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct construction_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct quadrature_error : std::runtime_error {
  double residual;
  quadrature_error(const std::string& what, double resid)
      : std::runtime_error(what + " (residual " + std::to_string(resid) + ")"),
        residual(resid) {}
};

struct instability_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct convergence_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fracvirial
