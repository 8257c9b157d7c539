#pragma once

// Load sweeps over data rate and reception strategy, with optional Monte
// Carlo columns, plus the frozen CSV/JSON result formats.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrfhss/model.hpp"
#include "lrfhss/nearest.hpp"

namespace lrfhss::sweep {

enum class Strategy { macro, nearest };
enum class Format { csv, json };
enum class McCoupling { model, physical };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);

struct SweepConfig {
  std::vector<DataRate> rates{DataRate::DR5, DataRate::DR6};
  std::vector<Strategy> strategies{Strategy::macro, Strategy::nearest};
  double load_min_mbps = 0.1;
  double load_max_mbps = 20.0;
  int points = 50;
  bool log_axis = false;
  bool include_zero = false;  // prepend a zero-load point
  double alpha = 3.5;
  double sigma_h_db = -22.0;
  double sigma_p_db = -20.0;
  std::optional<int> payload_bytes;  // default: the data rate's maximum
  nearest::Conditioning conditioning = nearest::Conditioning::factorized;
  bool mc_enabled = false;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  McCoupling coupling = McCoupling::model;
  std::string output;  // empty or "-" for stdout
  Format format = Format::csv;

  void validate() const;
  /// Load points in Mbps, ascending.
  std::vector<double> load_axis() const;
};

struct SweepRow {
  DataRate dr = DataRate::DR5;
  Strategy strategy = Strategy::macro;
  double load_mbps = 0.0;
  double s_header = 0.0;
  double s_payload = 0.0;
  double s_total = 0.0;
  double goodput_mbps = 0.0;
  std::optional<double> mc_s_total;
  std::optional<double> mc_std_error;

  bool operator==(const SweepRow&) const = default;
};

DataRateProfile profile_for(DataRate dr, const SweepConfig& config);

/// lambda_g = lambda_d = 1 and eta_d = load / B_T. Every model output depends
/// on the densities only through eta_d lambda_d / lambda_g.
NetworkScenario load_to_scenario(double load_mbps, const SweepConfig& config,
                                 const DataRateProfile& profile);

SuccessBreakdown analytic_point(const NetworkScenario& scenario, Strategy strategy,
                                const SweepConfig& config);

/// Rows sorted by (dr, strategy, load).
std::vector<SweepRow> run_sweep(const SweepConfig& config);

struct ThresholdResult {
  DataRate dr = DataRate::DR5;
  Strategy strategy = Strategy::macro;
  double target = 0.0;
  std::optional<double> load_mbps;  // empty when the crossing is outside the load range
  double s_total = 0.0;             // at load_mbps, or at the violated range end
  std::string status;               // "ok", "below_range", "above_range"
};

/// Bisection on the non-increasing s_total(load) over [load_min, load_max]
/// to relative tolerance 1e-6.
ThresholdResult find_threshold_load(const SweepConfig& config, DataRate dr, Strategy strategy,
                                    double target);
std::vector<ThresholdResult> find_threshold_loads(const SweepConfig& config, double target);

// ---- formats -----------------------------------------------------------------

inline constexpr std::string_view kCsvHeader =
    "dr,strategy,load_mbps,s_header,s_payload,s_total,goodput_mbps,mc_s_total,mc_std_error";

/// Effective configuration and modelling assumptions as '#'-prefixed lines.
std::string config_comment(const SweepConfig& config);

std::string to_csv(const std::vector<SweepRow>& rows, std::string_view comment = {});
std::vector<SweepRow> parse_csv(std::string_view text);
std::string to_json(const std::vector<SweepRow>& rows, const SweepConfig& config);

std::string thresholds_to_csv(const std::vector<ThresholdResult>& results,
                              std::string_view comment = {});
std::string thresholds_to_json(const std::vector<ThresholdResult>& results,
                               const SweepConfig& config);

/// Overlays keys present in a JSON config document onto `config`.
void apply_config_json(std::string_view json_text, SweepConfig& config);
SweepConfig load_config_file(const std::filesystem::path& path);
std::string config_to_json(const SweepConfig& config);

/// Writes to a sibling temporary file and renames it over `path`. Throws
/// IoError naming the path; no partial file is left behind.
void write_atomically(const std::filesystem::path& path, std::string_view content);

}  // namespace lrfhss::sweep
