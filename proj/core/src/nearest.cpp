#include "lrfhss/nearest.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lrfhss/errors.hpp"

namespace lrfhss::nearest {
namespace {

constexpr double kPi = std::numbers::pi;

double attenuation(const NetworkScenario& s, double lambda_hat, double sigma) {
  return geometry_constant(s.path_loss_alpha) * lambda_hat *
         std::pow(sigma, 2.0 / s.path_loss_alpha);
}

template <typename Conditional>
double average_over_nearest(const NetworkScenario& s, const QuadratureSpec& quad,
                            Conditional&& conditional) {
  const double lg = s.gateway_density;
  const auto integrand = [&](double y) {
    return conditional(y) * nearest_distance_density(y, lg);
  };
  const double value = integrate(integrand, 0.0, truncation_radius(lg), quad).value;
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace

double nearest_distance_density(double y, double gateway_density) {
  if (!(y >= 0.0)) throw DomainError("distance must be non-negative");
  if (!(gateway_density > 0.0)) throw DomainError("gateway density must be positive");
  return 2.0 * kPi * gateway_density * y * std::exp(-kPi * gateway_density * y * y);
}

double truncation_radius(double gateway_density) {
  return std::sqrt(std::log(1e16) / (kPi * gateway_density));
}

double header_success(const NetworkScenario& s, double lambda_hat, const QuadratureSpec& quad) {
  s.validate();
  if (lambda_hat == 0.0) return 1.0;
  const double a = attenuation(s, lambda_hat, s.profile.sigma_header);
  const int replicas = s.profile.header_replicas;
  return average_over_nearest(s, quad, [&](double y) {
    return 1.0 - std::pow(-std::expm1(-a * y * y), replicas);
  });
}

double header_success_closed_form(const NetworkScenario& s, double lambda_hat) {
  s.validate();
  const double a = attenuation(s, lambda_hat, s.profile.sigma_header);
  const double pl = kPi * s.gateway_density;
  const int replicas = s.profile.header_replicas;
  double sum = 0.0;
  double binom = 1.0;
  for (int r = 1; r <= replicas; ++r) {
    binom = binom * (replicas - r + 1) / r;
    const double sign = (r % 2 == 1) ? 1.0 : -1.0;
    sum += sign * binom * pl / (pl + r * a);
  }
  return sum;
}

double payload_success(const NetworkScenario& s, double lambda_hat, int fragment_count,
                       const QuadratureSpec& quad) {
  s.validate();
  if (lambda_hat == 0.0) return 1.0;
  const double a = attenuation(s, lambda_hat, s.profile.sigma_payload);
  const int needed = recovery_threshold(fragment_count, s.profile.recovery_fraction);
  return average_over_nearest(s, quad, [&](double y) {
    return binomial_upper_tail(fragment_count, needed, std::exp(-a * y * y));
  });
}

double joint_success(const NetworkScenario& s, double lambda_hat, int fragment_count,
                     const QuadratureSpec& quad) {
  s.validate();
  if (lambda_hat == 0.0) return 1.0;
  const double a_h = attenuation(s, lambda_hat, s.profile.sigma_header);
  const double a_p = attenuation(s, lambda_hat, s.profile.sigma_payload);
  const int replicas = s.profile.header_replicas;
  const int needed = recovery_threshold(fragment_count, s.profile.recovery_fraction);
  return average_over_nearest(s, quad, [&](double y) {
    const double header = 1.0 - std::pow(-std::expm1(-a_h * y * y), replicas);
    return header * binomial_upper_tail(fragment_count, needed, std::exp(-a_p * y * y));
  });
}

SuccessBreakdown total_success(const NetworkScenario& s, const AirtimeModel& air,
                               const Options& options) {
  s.validate();
  const double lambda_hat = effective_interferer_density(s, air);
  SuccessBreakdown out;
  out.header = header_success(s, lambda_hat, options.quadrature);
  out.payload = payload_success(s, lambda_hat, air.fragment_count, options.quadrature);
  if (options.conditioning == Conditioning::factorized) {
    out.total = out.header * out.payload;
  } else {
    out.total = joint_success(s, lambda_hat, air.fragment_count, options.quadrature);
  }
  return out;
}

SuccessBreakdown total_success(const NetworkScenario& s, const Options& options) {
  return total_success(s, airtimes(s), options);
}

}  // namespace lrfhss::nearest
