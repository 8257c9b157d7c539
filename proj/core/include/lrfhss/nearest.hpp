#pragma once

// Nearest-gateway reception: only the closest gateway may decode, so the
// per-gateway success laws are averaged over the PPP nearest-neighbour
// distance f(y) = 2 pi lambda_g y exp(-pi lambda_g y^2).

#include "lrfhss/model.hpp"
#include "lrfhss/quadrature.hpp"

namespace lrfhss::nearest {

enum class Conditioning {
  factorized,  // header and payload averaged separately, then multiplied
  joint,       // one expectation of header * payload at a common distance
};

struct Options {
  QuadratureSpec quadrature{};
  Conditioning conditioning = Conditioning::factorized;
};

double nearest_distance_density(double y, double gateway_density);

/// Upper integration limit where exp(-pi lambda_g y^2) falls below 1e-16.
double truncation_radius(double gateway_density);

double header_success(const NetworkScenario& scenario, double lambda_hat,
                      const QuadratureSpec& quad = {});

/// sum_{r=1}^{R} C(R,r) (-1)^(r+1) pi lambda_g / (pi lambda_g + r a),
/// a = K(alpha) lambda_hat sigma_H^(2/alpha).
double header_success_closed_form(const NetworkScenario& scenario, double lambda_hat);

/// Fragment successes at one gateway are independent only given its distance,
/// so the binomial tail sits inside the integral.
double payload_success(const NetworkScenario& scenario, double lambda_hat, int fragment_count,
                       const QuadratureSpec& quad = {});

/// E[S_k^H(y) * S^P(y)] over the nearest distance.
double joint_success(const NetworkScenario& scenario, double lambda_hat, int fragment_count,
                     const QuadratureSpec& quad = {});

/// Factorized: total = header * payload. Joint: header and payload are the
/// marginals and total is the joint expectation.
SuccessBreakdown total_success(const NetworkScenario& scenario, const Options& options = {});
SuccessBreakdown total_success(const NetworkScenario& scenario, const AirtimeModel& air,
                               const Options& options = {});

}  // namespace lrfhss::nearest
