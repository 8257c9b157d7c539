#include "lrfhss/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lrfhss/errors.hpp"

namespace lrfhss {
namespace {

// Products like mu * L land one ulp above an integer often enough to matter.
int ceil_tolerant(double x) { return static_cast<int>(std::ceil(x - 1e-9)); }

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

std::string_view to_string(DataRate dr) { return dr == DataRate::DR5 ? "DR5" : "DR6"; }

DataRate parse_data_rate(std::string_view text) {
  if (text == "DR5" || text == "dr5" || text == "5") return DataRate::DR5;
  if (text == "DR6" || text == "dr6" || text == "6") return DataRate::DR6;
  throw DomainError("unknown data rate '" + std::string(text) + "'");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

DataRateProfile DataRateProfile::defaults(DataRate dr) {
  DataRateProfile p;
  p.dr = dr;
  p.header_bits = 114;
  p.fragment_bits = 50;
  p.sigma_header = db_to_linear(-22.0);
  p.sigma_payload = db_to_linear(-20.0);
  if (dr == DataRate::DR5) {
    p.header_replicas = 3;
    p.recovery_fraction = 1.0 / 3.0;
    p.max_payload_bytes = 58;
  } else {
    p.header_replicas = 2;
    p.recovery_fraction = 2.0 / 3.0;
    p.max_payload_bytes = 133;
  }
  return p;
}

void DataRateProfile::validate() const {
  if (header_replicas < 1) throw DomainError("header_replicas must be >= 1");
  if (!(recovery_fraction > 0.0 && recovery_fraction < 1.0))
    throw DomainError("recovery_fraction must lie in (0, 1)");
  if (header_bits <= 0 || fragment_bits <= 0) throw DomainError("bit counts must be positive");
  if (max_payload_bytes <= 0) throw DomainError("max_payload_bytes must be positive");
  if (!positive_finite(sigma_header) || !positive_finite(sigma_payload))
    throw DomainError("SINR thresholds must be positive linear ratios");
}

void Channelization::validate() const {
  if (n_ocw < 1 || n_obw < 1 || grid_count < 1 || grid_size < 1)
    throw DomainError("channel counts must be positive");
  if (n_obw > total_obw) throw DomainError("n_obw exceeds total_obw");
  if (grid_count * grid_size > total_obw)
    throw DomainError("grid_count * grid_size exceeds the OBWs in the OCW");
  if (!positive_finite(obw_width_hz) || !positive_finite(obw_bitrate_bps))
    throw DomainError("OBW width and bitrate must be positive");
  if (static_cast<double>(grid_count * grid_size) * obw_width_hz > ocw_span_hz)
    throw DomainError("grid plan does not fit inside the OCW span");
}

void NetworkScenario::validate() const {
  if (!(path_loss_alpha > 2.0) || !std::isfinite(path_loss_alpha))
    throw DomainError("path-loss exponent must exceed 2");
  if (!positive_finite(gateway_density)) throw DomainError("gateway density must be positive");
  if (!positive_finite(device_density)) throw DomainError("device density must be positive");
  if (!(packet_rate >= 0.0) || !std::isfinite(packet_rate))
    throw DomainError("packet rate must be non-negative");
  profile.validate();
  channels.validate();
  if (payload_bytes <= 0) throw DomainError("payload must be positive");
  if (payload_bytes > profile.max_payload_bytes)
    throw DomainError("payload of " + std::to_string(payload_bytes) + " bytes exceeds the " +
                      std::string(to_string(profile.dr)) + " maximum of " +
                      std::to_string(profile.max_payload_bytes));
}

double geometry_constant(double alpha) {
  if (!(alpha > 2.0) || !std::isfinite(alpha))
    throw DomainError("K(alpha) requires alpha > 2, got " + std::to_string(alpha));
  constexpr double pi = std::numbers::pi;
  return 2.0 * pi * pi / (alpha * std::sin(2.0 * pi / alpha));
}

double k1(double alpha) { return std::numbers::pi / geometry_constant(alpha); }

double k2(int replicas) {
  if (replicas < 1) throw DomainError("K2 requires R >= 1");
  // Summed smallest-first.
  double h = 0.0;
  for (int r = replicas; r >= 1; --r) h += 1.0 / r;
  return -h;
}

int recovery_threshold(int fragment_count, double recovery_fraction) {
  return ceil_tolerant(recovery_fraction * fragment_count);
}

int fragment_count(int payload_bytes, const DataRateProfile& profile) {
  if (payload_bytes <= 0) throw DomainError("payload must be positive");
  if (payload_bytes > profile.max_payload_bytes)
    throw DomainError("payload of " + std::to_string(payload_bytes) +
                      " bytes exceeds the profile maximum of " +
                      std::to_string(profile.max_payload_bytes));
  const double coded_bits = 8.0 * payload_bytes / profile.recovery_fraction;
  return std::max(1, ceil_tolerant(coded_bits / profile.fragment_bits));
}

AirtimeModel airtimes(const DataRateProfile& profile, const Channelization& channels,
                      int fragment_count) {
  if (!positive_finite(channels.obw_bitrate_bps)) throw DomainError("OBW bitrate must be positive");
  return AirtimeModel{
      .header_duration = profile.header_bits / channels.obw_bitrate_bps,
      .fragment_duration = profile.fragment_bits / channels.obw_bitrate_bps,
      .fragment_count = fragment_count,
  };
}

AirtimeModel airtimes(const NetworkScenario& scenario) {
  return airtimes(scenario.profile, scenario.channels,
                  fragment_count(scenario.payload_bytes, scenario.profile));
}

int total_packet_bits(const DataRateProfile& profile, int fragment_count) {
  return profile.header_replicas * profile.header_bits + fragment_count * profile.fragment_bits;
}

double effective_interferer_density(const NetworkScenario& scenario, const AirtimeModel& air) {
  if (air.fragment_count < 1) throw DomainError("fragment count must be >= 1");
  const double on_air = scenario.profile.header_replicas * air.header_duration +
                        air.fragment_count * air.fragment_duration;
  const double subchannels =
      static_cast<double>(scenario.channels.n_ocw) * scenario.channels.n_obw;
  // Factor 2: pure-ALOHA vulnerability window.
  return 2.0 * scenario.packet_rate * on_air / subchannels * scenario.device_density;
}

double link_success(double y, double alpha, double lambda_hat, double sigma, int replicas) {
  if (!(y >= 0.0)) throw DomainError("distance must be non-negative");
  const double exponent =
      geometry_constant(alpha) * lambda_hat * std::pow(sigma, 2.0 / alpha) * y * y;
  const double attempt_failure = -std::expm1(-exponent);
  return 1.0 - std::pow(attempt_failure, replicas);
}

double header_success_per_gateway(double y, const NetworkScenario& scenario, double lambda_hat) {
  return link_success(y, scenario.path_loss_alpha, lambda_hat, scenario.profile.sigma_header,
                      scenario.profile.header_replicas);
}

double macro_success(double alpha, double sigma, int replicas, double ratio) {
  if (!(ratio >= 0.0)) throw DomainError("density ratio must be non-negative");
  const double exponent = k1(alpha) * k2(replicas) * std::pow(sigma, -2.0 / alpha) * ratio;
  return -std::expm1(exponent);
}

namespace {

double density_ratio(const NetworkScenario& scenario, double lambda_hat) {
  if (!(lambda_hat >= 0.0)) throw DomainError("interferer density must be non-negative");
  // Zero interferer density is the no-load limit.
  if (lambda_hat == 0.0) return std::numeric_limits<double>::infinity();
  return scenario.gateway_density / lambda_hat;
}

}  // namespace

double header_success_macro(const NetworkScenario& scenario, double lambda_hat) {
  return macro_success(scenario.path_loss_alpha, scenario.profile.sigma_header,
                       scenario.profile.header_replicas, density_ratio(scenario, lambda_hat));
}

double fragment_success_macro(const NetworkScenario& scenario, double lambda_hat) {
  return macro_success(scenario.path_loss_alpha, scenario.profile.sigma_payload, 1,
                       density_ratio(scenario, lambda_hat));
}

double payload_success(double fragment_success, int fragment_count, double recovery_fraction) {
  if (!(fragment_success >= 0.0 && fragment_success <= 1.0))
    throw DomainError("fragment success must be a probability");
  if (fragment_count < 1) throw DomainError("fragment count must be >= 1");
  return binomial_upper_tail(fragment_count,
                             recovery_threshold(fragment_count, recovery_fraction),
                             fragment_success);
}

SuccessBreakdown total_success(const NetworkScenario& scenario, const AirtimeModel& air) {
  scenario.validate();
  const double lambda_hat = effective_interferer_density(scenario, air);
  SuccessBreakdown out;
  out.header = header_success_macro(scenario, lambda_hat);
  const double fragment = fragment_success_macro(scenario, lambda_hat);
  out.payload = payload_success(fragment, air.fragment_count, scenario.profile.recovery_fraction);
  out.total = out.header * out.payload;
  return out;
}

SuccessBreakdown total_success(const NetworkScenario& scenario) {
  return total_success(scenario, airtimes(scenario));
}

double offered_load(const NetworkScenario& scenario, double total_bits) {
  if (!(total_bits > 0.0)) throw DomainError("total packet bits must be positive");
  return scenario.packet_rate * scenario.device_density / scenario.gateway_density * total_bits;
}

double goodput_per_gateway(const NetworkScenario& scenario, double s_total) {
  return s_total * scenario.packet_rate * scenario.device_density / scenario.gateway_density *
         8.0 * scenario.payload_bytes;
}

}  // namespace lrfhss
