#pragma once

#include <functional>

namespace lrfhss {

struct QuadratureSpec {
  enum class Scheme { adaptive, fixed_node };
  Scheme scheme = Scheme::adaptive;
  double rel_tol = 1e-10;
  int max_subdivisions = 400;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int subdivisions = 0;
};

/// Integrates f over [a, b]. Adaptive: global bisection of the worst 15-point
/// Gauss-Kronrod panel until the summed error estimate drops below
/// rel_tol * |value|. Fixed-node: composite 20-point Gauss-Legendre on
/// max_subdivisions equal panels, checked against the half-resolution rule.
/// Throws NumericalError with diagnostics when the tolerance is not met.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec = {});

}  // namespace lrfhss
