// lrfhss: load sweeps, Monte Carlo validation, threshold search and hop
// sequences from the command line.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lrfhss/errors.hpp"
#include "lrfhss/hopping.hpp"
#include "lrfhss/sweep.hpp"

namespace {

using namespace lrfhss;

enum Exit { kOk = 0, kInvalidConfig = 2, kNumerical = 3, kIo = 4 };

struct SweepFlags {
  std::string config_path;
  std::string dr;
  std::string strategy;
  double load_min = 0.0;
  double load_max = 0.0;
  int points = 0;
  bool log_axis = false;
  bool include_zero = false;
  double alpha = 0.0;
  double sigma_h_db = 0.0;
  double sigma_p_db = 0.0;
  int payload_bytes = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  bool nearest_joint = false;
  std::string coupling;
  std::string out;
  std::string format;
  double target = 0.8;
};

void add_sweep_flags(CLI::App* cmd, SweepFlags& f, bool mc, bool threshold) {
  cmd->add_option("--config", f.config_path, "JSON config file; flags override its values");
  cmd->add_option("--dr", f.dr, "DR5, DR6 or both");
  cmd->add_option("--strategy", f.strategy, "macro, nearest or both");
  cmd->add_option("--load-min", f.load_min, "lowest load, Mbps");
  cmd->add_option("--load-max", f.load_max, "highest load, Mbps");
  cmd->add_option("--alpha", f.alpha, "path-loss exponent");
  cmd->add_option("--sigma-h-db", f.sigma_h_db, "header SINR threshold, dB");
  cmd->add_option("--sigma-p-db", f.sigma_p_db, "fragment SINR threshold, dB");
  cmd->add_option("--payload-bytes", f.payload_bytes, "payload size; default is the DR maximum");
  cmd->add_flag("--nearest-joint", f.nearest_joint,
                "average header and payload over a common nearest distance");
  cmd->add_option("--out", f.out, "output file; stdout when omitted or '-'");
  cmd->add_option("--format", f.format, "csv or json");
  if (threshold) {
    cmd->add_option("--target", f.target, "success probability to cross");
  } else {
    cmd->add_option("--points", f.points, "load points");
    cmd->add_flag("--log-axis", f.log_axis, "logarithmic load spacing");
    cmd->add_flag("--include-zero", f.include_zero, "prepend a zero-load point");
  }
  if (mc) {
    cmd->add_option("--trials", f.trials, "Monte Carlo trials per point");
    cmd->add_option("--seed", f.seed, "Monte Carlo seed");
    cmd->add_option("--workers", f.workers, "Monte Carlo threads; 0 uses every core");
    cmd->add_option("--coupling", f.coupling,
                    "model: sample with the closed forms' independence structure; "
                    "physical: one gateway field and one interferer field per message");
  }
}

bool given(const CLI::App* cmd, const std::string& name) {
  try {
    return cmd->count(name) > 0;
  } catch (const CLI::OptionNotFound&) {
    return false;
  }
}

sweep::SweepConfig build_config(const CLI::App* cmd, const SweepFlags& f) {
  sweep::SweepConfig c;
  if (given(cmd, "--config")) c = sweep::load_config_file(f.config_path);
  nlohmann::json overrides = nlohmann::json::object();
  if (given(cmd, "--dr")) overrides["dr"] = f.dr;
  if (given(cmd, "--strategy")) overrides["strategy"] = f.strategy;
  if (given(cmd, "--format")) overrides["format"] = f.format;
  if (given(cmd, "--coupling")) overrides["mc_coupling"] = f.coupling;
  sweep::apply_config_json(overrides.dump(), c);

  if (given(cmd, "--load-min")) c.load_min_mbps = f.load_min;
  if (given(cmd, "--load-max")) c.load_max_mbps = f.load_max;
  if (given(cmd, "--points")) c.points = f.points;
  if (given(cmd, "--log-axis")) c.log_axis = f.log_axis;
  if (given(cmd, "--include-zero")) c.include_zero = f.include_zero;
  if (given(cmd, "--alpha")) c.alpha = f.alpha;
  if (given(cmd, "--sigma-h-db")) c.sigma_h_db = f.sigma_h_db;
  if (given(cmd, "--sigma-p-db")) c.sigma_p_db = f.sigma_p_db;
  if (given(cmd, "--payload-bytes")) c.payload_bytes = f.payload_bytes;
  if (given(cmd, "--trials")) c.trials = f.trials;
  if (given(cmd, "--seed")) c.seed = f.seed;
  if (given(cmd, "--workers")) c.workers = f.workers;
  if (given(cmd, "--nearest-joint")) c.conditioning = nearest::Conditioning::joint;
  if (given(cmd, "--out")) c.output = f.out;
  return c;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("stdout: write failed");
    return;
  }
  sweep::write_atomically(path, text);
}

int run_sweep_command(const CLI::App* cmd, const SweepFlags& f, bool mc) {
  sweep::SweepConfig c = build_config(cmd, f);
  c.mc_enabled = mc;
  c.validate();
  const std::vector<sweep::SweepRow> rows = sweep::run_sweep(c);
  if (mc) {
    int outside = 0;
    for (const auto& r : rows) {
      if (std::abs(*r.mc_s_total - r.s_total) > 3.0 * *r.mc_std_error) ++outside;
    }
    std::cerr << rows.size() << " points, " << outside
              << " with |MC - closed form| > 3 standard errors\n";
  }
  emit(c.output, c.format == sweep::Format::csv ? sweep::to_csv(rows, sweep::config_comment(c))
                                                 : sweep::to_json(rows, c));
  return kOk;
}

int run_threshold_command(const CLI::App* cmd, const SweepFlags& f) {
  sweep::SweepConfig c = build_config(cmd, f);
  c.validate();
  const auto results = sweep::find_threshold_loads(c, f.target);
  emit(c.output, c.format == sweep::Format::csv
                     ? sweep::thresholds_to_csv(results, sweep::config_comment(c))
                     : sweep::thresholds_to_json(results, c));
  return kOk;
}

struct HopFlags {
  std::uint32_t device_id = 0;
  std::uint32_t seed = 0;
  int grid = 0;
  int length = 31;
  std::string out;
};

int run_hopseq_command(const HopFlags& f) {
  const Channelization channels{};
  if (f.grid < 0 || f.grid >= channels.grid_count)
    throw DomainError("grid must lie in [0, " + std::to_string(channels.grid_count) + ")");
  if (f.length < 1) throw DomainError("length must be at least 1");
  const hopping::GridPlan plan = hopping::build_grid_plan(channels);
  const hopping::HopSequence seq =
      hopping::generate_sequence(f.device_id, f.seed, f.grid, f.length, channels);
  nlohmann::json j;
  j["device_id"] = seq.device_id;
  j["seed"] = seq.seed;
  j["grid"] = seq.grid_index;
  j["hops"] = seq.hops;
  std::vector<double> centers;
  for (int h : seq.hops) centers.push_back(plan.center_hz[seq.grid_index][h]);
  j["centers_hz"] = centers;
  emit(f.out, j.dump() + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LR-FHSS macro-diversity capacity sweeps"};
  app.require_subcommand(1);

  SweepFlags analytic_flags, validate_flags, threshold_flags;
  HopFlags hop_flags;

  CLI::App* analytic = app.add_subcommand("analytic", "closed-form load sweep");
  add_sweep_flags(analytic, analytic_flags, false, false);
  CLI::App* validate = app.add_subcommand("validate", "closed-form sweep with Monte Carlo columns");
  add_sweep_flags(validate, validate_flags, true, false);
  CLI::App* threshold = app.add_subcommand("threshold", "load where success crosses a target");
  add_sweep_flags(threshold, threshold_flags, false, true);
  CLI::App* hopseq = app.add_subcommand("hopseq", "hop sequence of one packet as JSON");
  hopseq->add_option("--device-id", hop_flags.device_id, "32-bit device identifier");
  hopseq->add_option("--seed", hop_flags.seed, "32-bit sequence seed");
  hopseq->add_option("--grid", hop_flags.grid, "grid index");
  hopseq->add_option("--length", hop_flags.length, "hops (header replicas + fragments)");
  hopseq->add_option("--out", hop_flags.out, "output file; stdout when omitted or '-'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }

  try {
    if (analytic->parsed()) return run_sweep_command(analytic, analytic_flags, false);
    if (validate->parsed()) return run_sweep_command(validate, validate_flags, true);
    if (threshold->parsed()) return run_threshold_command(threshold, threshold_flags);
    if (hopseq->parsed()) return run_hopseq_command(hop_flags);
  } catch (const DomainError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "I/O failure: " << e.what() << '\n';
    return kIo;
  }
  return kInvalidConfig;
}
