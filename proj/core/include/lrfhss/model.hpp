#pragma once

// Closed-form success probabilities for LR-FHSS uplinks received by a
// Poisson field of gateways, with a thinned Poisson field of interferers.
//
// All thresholds are linear power ratios. Distances and densities are in
// consistent but otherwise arbitrary units; only lambda_g / lambda_hat
// enters the macro-diversity expressions.

#include <string_view>

namespace lrfhss {

enum class DataRate { DR5, DR6 };

std::string_view to_string(DataRate dr);
DataRate parse_data_rate(std::string_view text);

double db_to_linear(double db);

struct DataRateProfile {
  DataRate dr = DataRate::DR5;
  int header_replicas = 3;           // R
  double recovery_fraction = 1.0 / 3.0;  // mu
  int header_bits = 114;
  int fragment_bits = 50;
  int max_payload_bytes = 58;
  double sigma_header = 0.0;         // linear
  double sigma_payload = 0.0;        // linear

  /// Table defaults for the FCC data rates: thresholds -22 dB (header) and -20 dB (payload).
  static DataRateProfile defaults(DataRate dr);

  void validate() const;
};

struct Channelization {
  int n_ocw = 1;
  int n_obw = 3120;        // usable OBWs per OCW
  int total_obw = 3125;    // OBWs the OCW is divided into
  double obw_width_hz = 488.0;
  int grid_count = 52;
  int grid_size = 60;
  double grid_spacing_hz = 25400.0;  // nominal; the interleaved plan yields 52 * 488 Hz
  double obw_bitrate_bps = 488.0;
  double ocw_span_hz = 1.523e6;

  void validate() const;
};

struct NetworkScenario {
  double path_loss_alpha = 3.5;
  double gateway_density = 1.0;   // lambda_g
  double device_density = 1.0;    // lambda_d
  double packet_rate = 0.0;       // eta_d, packets/s per device
  int payload_bytes = 58;
  DataRateProfile profile = DataRateProfile::defaults(DataRate::DR5);
  Channelization channels{};

  void validate() const;
};

struct AirtimeModel {
  double header_duration = 0.0;    // seconds
  double fragment_duration = 0.0;  // seconds
  int fragment_count = 1;          // L
};

struct SuccessBreakdown {
  double header = 1.0;
  double payload = 1.0;
  double total = 1.0;
};

// ---- constants --------------------------------------------------------------

/// K(alpha) = 2 pi^2 / (alpha sin(2 pi / alpha)). Throws DomainError for alpha <= 2.
double geometry_constant(double alpha);

/// K1(alpha) = pi / K(alpha).
double k1(double alpha);

/// K2(R) = sum_{r=1}^{R} C(R,r) (-1)^r / r, evaluated through the identity
/// K2(R) = -H_R (negative R-th harmonic number), which is exact and stable.
double k2(int replicas);

// ---- packet structure ------------------------------------------------------

/// ceil(mu * L), tolerant to mu * L landing a rounding error above an integer.
int recovery_threshold(int fragment_count, double recovery_fraction);

/// Fragments on air after rate-mu erasure expansion: ceil((8 B / mu) / fragment_bits).
/// This mapping is a modelling assumption (the packet format leaves it open).
int fragment_count(int payload_bytes, const DataRateProfile& profile);

AirtimeModel airtimes(const DataRateProfile& profile, const Channelization& channels,
                      int fragment_count);

/// Airtime for the scenario's payload and profile.
AirtimeModel airtimes(const NetworkScenario& scenario);

/// All on-air bits of one packet: R * header_bits + L * fragment_bits.
int total_packet_bits(const DataRateProfile& profile, int fragment_count);

// ---- interference ----------------------------------------------------------

/// lambda_hat = 2 eta (R t_H + L t_P) / (n_ocw n_obw) * lambda_d.
double effective_interferer_density(const NetworkScenario& scenario, const AirtimeModel& air);

/// Success of one link after `replicas` independent attempts at distance y:
/// 1 - (1 - exp(-K lambda_hat sigma^(2/alpha) y^2))^replicas.
double link_success(double y, double alpha, double lambda_hat, double sigma, int replicas);

double header_success_per_gateway(double y, const NetworkScenario& scenario, double lambda_hat);

/// 1 - exp(K1 K2(R) sigma^(-2/alpha) ratio) where ratio = lambda_g / lambda_hat.
/// ratio = +inf (no interferers) gives exactly 1.
double macro_success(double alpha, double sigma, int replicas, double ratio);

double header_success_macro(const NetworkScenario& scenario, double lambda_hat);
double fragment_success_macro(const NetworkScenario& scenario, double lambda_hat);

// ---- payload ---------------------------------------------------------------

/// P(X >= k) for X ~ Binomial(n, p), accumulated in log space.
double binomial_upper_tail(int n, int k, double p);

/// P(X >= ceil(mu L)) for X ~ Binomial(L, fragment_success).
double payload_success(double fragment_success, int fragment_count, double recovery_fraction);

// ---- composition -----------------------------------------------------------

SuccessBreakdown total_success(const NetworkScenario& scenario);
SuccessBreakdown total_success(const NetworkScenario& scenario, const AirtimeModel& air);

/// eta_d lambda_d / lambda_g * B_T, bits/s per gateway.
double offered_load(const NetworkScenario& scenario, double total_bits);

/// S eta_d lambda_d / lambda_g * 8 B_P, bits/s per gateway.
double goodput_per_gateway(const NetworkScenario& scenario, double s_total);

}  // namespace lrfhss
