#pragma once

// Monte Carlo oracle for the success probabilities: samples Poisson gateway
// fields, Rayleigh fading and Poisson interferer fields, then applies the
// SINR decoding rule per (message, gateway) link.
//
// The sampling model fixes which random quantities are shared. The closed
// forms assume independence in specific places (each fragment sees its own
// gateway geometry in the binomial payload law; interference is independent
// across gateways in the PGFL step), so validating a formula means sampling
// with the matching coupling. SamplingModel::physical() shares everything
// that a real deployment shares.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "lrfhss/model.hpp"
#include "lrfhss/nearest.hpp"

namespace lrfhss::mc {

enum class GatewayGeometry {
  common,       // one gateway field for every message of the packet
  split,        // one field for the header replicas, another for all fragments
  per_message,  // one field for the header replicas, a fresh one per fragment
};

enum class InterferenceField {
  per_link,  // independent interferers for every (message, gateway) link
  shared,    // one interferer field per message, seen by every gateway
};

struct SamplingModel {
  GatewayGeometry geometry = GatewayGeometry::per_message;
  InterferenceField interference = InterferenceField::per_link;

  /// Independence structure of the macro-diversity closed forms.
  static constexpr SamplingModel macro_model() {
    return {GatewayGeometry::per_message, InterferenceField::per_link};
  }
  /// Independence structure of the nearest-gateway integrals.
  static constexpr SamplingModel nearest_model(nearest::Conditioning c) {
    return {c == nearest::Conditioning::joint ? GatewayGeometry::common : GatewayGeometry::split,
            InterferenceField::per_link};
  }
  static constexpr SamplingModel physical() {
    return {GatewayGeometry::common, InterferenceField::shared};
  }

  bool operator==(const SamplingModel&) const = default;
};

std::string_view to_string(GatewayGeometry g);
std::string_view to_string(InterferenceField f);

inline constexpr double kMinDistance = 1e-6;

struct SimRegion {
  double radius = 0.0;               // gateways live on the disk of this radius around the device
  double interference_radius = 0.0;  // interferers are explicit within this range of a gateway

  /// Default window for a scenario: covers the decoding range and keeps the
  /// empty-window probability below 1e-12.
  static SimRegion for_scenario(const NetworkScenario& scenario, double lambda_hat);
  void validate(double gateway_density) const;
};

/// Mean interference from a Poisson field of unit-mean marks outside a disk:
/// lambda_hat * 2 pi rho^(2 - alpha) / (alpha - 2).
double far_field_interference(double lambda_hat, double alpha, double rho);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct PolarPoint {
  double range = 0.0;
  double bearing = 0.0;
  Point cartesian() const;
};

struct Interferer {
  PolarPoint offset;
  double fading = 1.0;
};

struct MessageDraw {
  std::size_t gateway_set = 0;
  std::vector<double> device_fading;  // one mark per gateway of the set
  // per_link: one list per gateway, offsets relative to that gateway.
  // shared: a single list, offsets relative to the device.
  std::vector<std::vector<Interferer>> interferers;
};

struct PppRealization {
  SamplingModel sampling{};
  double path_loss_alpha = 3.5;
  double interference_radius = 0.0;
  double far_field_interference = 0.0;
  int header_replicas = 1;
  std::vector<std::vector<PolarPoint>> gateway_sets;  // each sorted by range
  std::vector<MessageDraw> messages;                  // header replicas, then fragments

  bool is_header(std::size_t message) const {
    return message < static_cast<std::size_t>(header_replicas);
  }
  int fragment_count() const { return static_cast<int>(messages.size()) - header_replicas; }
  const std::vector<PolarPoint>& gateways_of(std::size_t message) const {
    return gateway_sets[messages[message].gateway_set];
  }
};

PppRealization sample_realization(const NetworkScenario& scenario, double lambda_hat,
                                  const SimRegion& region, const SamplingModel& sampling,
                                  std::uint64_t seed, std::uint64_t trial);

/// f y^-alpha / (noise + I), where I counts interferers within the
/// interference radius plus the far-field mean.
double sinr(const PppRealization& realization, std::size_t message, std::size_t gateway,
            double noise = 0.0);

/// SINR > sigma, evaluated as f y^-alpha > sigma (noise + I) with interferers
/// accumulated in stored order.
bool decodes(const PppRealization& realization, std::size_t message, std::size_t gateway,
             double sigma, double noise = 0.0);

struct TrialOutcome {
  std::vector<bool> header_decoded;           // per gateway of the header field
  std::vector<std::size_t> fragments_received;  // by at least one gateway
  bool macro_header = false;
  bool macro_payload = false;
  bool macro_success = false;
  bool nearest_header = false;
  bool nearest_payload = false;
  bool nearest_success = false;
};

TrialOutcome evaluate_trial(const PppRealization& realization, const DataRateProfile& profile,
                            double noise = 0.0);

struct TrialFlags {
  bool macro_header = false;
  bool macro_payload = false;
  bool nearest_header = false;
  bool nearest_payload = false;

  bool macro_success() const { return macro_header && macro_payload; }
  bool nearest_success() const { return nearest_header && nearest_payload; }
  bool operator==(const TrialFlags&) const = default;
};

TrialFlags flags_of(const TrialOutcome& outcome);

/// One trial of the estimator. Gateways, links and shared fields are drawn
/// lazily from the same keyed streams sample_realization uses, so the flags
/// equal flags_of(evaluate_trial(sample_realization(...))) exactly.
TrialFlags run_trial(const NetworkScenario& scenario, double lambda_hat, const SimRegion& region,
                     const SamplingModel& sampling, std::uint64_t seed, std::uint64_t trial,
                     double noise = 0.0);

struct EstimateWithCI {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t rng_seed = 0;

  static EstimateWithCI from_counts(std::uint64_t successes, std::uint64_t trials,
                                    std::uint64_t seed);
};

struct StrategyEstimate {
  EstimateWithCI header;
  EstimateWithCI payload;
  EstimateWithCI total;
};

struct EstimateOptions {
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  SamplingModel sampling = SamplingModel::macro_model();
  unsigned workers = 0;  // 0: hardware concurrency
  double noise = 0.0;
  std::optional<SimRegion> region;
};

struct Estimate {
  StrategyEstimate macro;
  StrategyEstimate nearest;
  std::uint64_t dominance_violations = 0;  // trials with nearest success but macro failure
  double lambda_hat = 0.0;
  SimRegion region;
  SamplingModel sampling;
};

/// Both strategies are scored on the same realizations. The result depends
/// only on (scenario, options minus workers).
Estimate estimate(const NetworkScenario& scenario, const EstimateOptions& options);

}  // namespace lrfhss::mc
