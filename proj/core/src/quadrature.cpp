#include "lrfhss/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "lrfhss/errors.hpp"

namespace lrfhss {
namespace {

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel kronrod_panel(const std::function<double(double)>& f, double a, double b) {
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &error);
  return {a, b, value, error};
}

bool converged(double value, double error, double rel_tol) {
  return error <= rel_tol * std::fabs(value) || error <= 1e-300;
}

[[noreturn]] void fail(const char* scheme, double a, double b, double value, double error,
                       int panels, double rel_tol) {
  std::ostringstream msg;
  msg.precision(6);
  msg << scheme << " quadrature on [" << a << ", " << b << "] did not converge: value " << value
      << ", error estimate " << error << " (rel_tol " << rel_tol << ") after " << panels
      << " panels";
  throw NumericalError(msg.str());
}

QuadratureResult adaptive(const std::function<double(double)>& f, double a, double b,
                          const QuadratureSpec& spec) {
  std::priority_queue<Panel> panels;
  panels.push(kronrod_panel(f, a, b));
  double value = panels.top().value;
  double error = panels.top().error;
  int count = 1;

  while (!converged(value, error, spec.rel_tol)) {
    if (count >= spec.max_subdivisions) fail("adaptive", a, b, value, error, count, spec.rel_tol);
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Panel left = kronrod_panel(f, worst.a, mid);
    const Panel right = kronrod_panel(f, mid, worst.b);
    panels.push(left);
    panels.push(right);
    ++count;

    // Re-sum from scratch to avoid drift from repeated subtraction.
    value = 0.0;
    error = 0.0;
    auto copy = panels;
    while (!copy.empty()) {
      value += copy.top().value;
      error += copy.top().error;
      copy.pop();
    }
  }
  return {value, error, count};
}

double composite_gauss(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += boost::math::quadrature::gauss<double, 20>::integrate(f, a + i * h, a + (i + 1) * h);
  }
  return sum;
}

QuadratureResult fixed_node(const std::function<double(double)>& f, double a, double b,
                            const QuadratureSpec& spec) {
  const int n = std::max(2, spec.max_subdivisions);
  const double fine = composite_gauss(f, a, b, n);
  const double coarse = composite_gauss(f, a, b, n / 2);
  const double error = std::fabs(fine - coarse);
  if (!converged(fine, error, spec.rel_tol)) fail("fixed-node", a, b, fine, error, n, spec.rel_tol);
  return {fine, error, n};
}

}  // namespace

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0)) throw DomainError("quadrature rel_tol must be positive");
  if (max_subdivisions < 1) throw DomainError("quadrature max_subdivisions must be >= 1");
}

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureSpec& spec) {
  spec.validate();
  if (!(b >= a)) throw DomainError("integration bounds out of order");
  if (a == b) return {};
  return spec.scheme == QuadratureSpec::Scheme::adaptive ? adaptive(f, a, b, spec)
                                                         : fixed_node(f, a, b, spec);
}

}  // namespace lrfhss
