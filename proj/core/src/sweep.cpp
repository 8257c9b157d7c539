#include "lrfhss/sweep.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <system_error>
#include <thread>

#include "json.hpp"
#include "lrfhss/errors.hpp"
#include "lrfhss/montecarlo.hpp"

namespace lrfhss::sweep {
namespace {

using nlohmann::json;

std::string fmt_probability(double p) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.9g", p);
  return buf.data();
}

std::string fmt_shortest(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view field, std::size_t line) {
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw DomainError("CSV line " + std::to_string(line) + ": bad number '" + std::string(field) +
                      "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view coupling_name(McCoupling c) { return c == McCoupling::model ? "model" : "physical"; }

std::string_view conditioning_name(nearest::Conditioning c) {
  return c == nearest::Conditioning::factorized ? "factorized" : "joint";
}

bool row_order(const SweepRow& a, const SweepRow& b) {
  if (a.dr != b.dr) return a.dr < b.dr;
  if (a.strategy != b.strategy) return a.strategy < b.strategy;
  return a.load_mbps < b.load_mbps;
}

mc::SamplingModel sampling_for(Strategy strategy, const SweepConfig& config) {
  if (config.coupling == McCoupling::physical) return mc::SamplingModel::physical();
  return strategy == Strategy::macro ? mc::SamplingModel::macro_model()
                                     : mc::SamplingModel::nearest_model(config.conditioning);
}

double s_total_at(const SweepConfig& config, const DataRateProfile& profile, Strategy strategy,
                  double load_mbps) {
  return analytic_point(load_to_scenario(load_mbps, config, profile), strategy, config).total;
}

}  // namespace

std::string_view to_string(Strategy s) { return s == Strategy::macro ? "macro" : "nearest"; }

Strategy parse_strategy(std::string_view text) {
  if (text == "macro") return Strategy::macro;
  if (text == "nearest") return Strategy::nearest;
  throw DomainError("unknown strategy '" + std::string(text) + "'");
}

void SweepConfig::validate() const {
  if (rates.empty()) throw DomainError("no data rate selected");
  if (strategies.empty()) throw DomainError("no strategy selected");
  if (!(load_min_mbps > 0.0) || !std::isfinite(load_min_mbps))
    throw DomainError("load_min must be positive (use include_zero for the zero-load point)");
  if (!(load_max_mbps > load_min_mbps) || !std::isfinite(load_max_mbps))
    throw DomainError("load_max must exceed load_min");
  if (points < 2) throw DomainError("a sweep needs at least 2 points");
  if (!(alpha > 2.0)) throw DomainError("path-loss exponent must exceed 2");
  if (!std::isfinite(sigma_h_db) || !std::isfinite(sigma_p_db))
    throw DomainError("SINR thresholds must be finite");
  if (payload_bytes && *payload_bytes <= 0) throw DomainError("payload_bytes must be positive");
  if (mc_enabled && trials < 1) throw DomainError("Monte Carlo needs at least one trial");
  for (DataRate dr : rates) {
    const DataRateProfile profile = profile_for(dr, *this);
    profile.validate();
    if (payload_bytes && *payload_bytes > profile.max_payload_bytes)
      throw DomainError("payload_bytes exceeds the " + std::string(to_string(dr)) + " maximum of " +
                        std::to_string(profile.max_payload_bytes));
  }
}

std::vector<double> SweepConfig::load_axis() const {
  std::vector<double> out;
  if (include_zero) out.push_back(0.0);
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    double x = log_axis ? load_min_mbps * std::pow(load_max_mbps / load_min_mbps, t)
                        : load_min_mbps + t * (load_max_mbps - load_min_mbps);
    if (i == points - 1) x = load_max_mbps;
    out.push_back(x);
  }
  return out;
}

DataRateProfile profile_for(DataRate dr, const SweepConfig& config) {
  DataRateProfile p = DataRateProfile::defaults(dr);
  p.sigma_header = db_to_linear(config.sigma_h_db);
  p.sigma_payload = db_to_linear(config.sigma_p_db);
  return p;
}

NetworkScenario load_to_scenario(double load_mbps, const SweepConfig& config,
                                 const DataRateProfile& profile) {
  if (!(load_mbps >= 0.0)) throw DomainError("load must be non-negative");
  NetworkScenario s;
  s.path_loss_alpha = config.alpha;
  s.gateway_density = 1.0;
  s.device_density = 1.0;
  s.profile = profile;
  s.payload_bytes = config.payload_bytes.value_or(profile.max_payload_bytes);
  const int bits = total_packet_bits(profile, fragment_count(s.payload_bytes, profile));
  s.packet_rate = load_mbps * 1e6 / bits;
  s.validate();
  return s;
}

SuccessBreakdown analytic_point(const NetworkScenario& scenario, Strategy strategy,
                                const SweepConfig& config) {
  if (strategy == Strategy::macro) return total_success(scenario);
  nearest::Options opts;
  opts.conditioning = config.conditioning;
  return nearest::total_success(scenario, opts);
}

std::vector<SweepRow> run_sweep(const SweepConfig& config) {
  config.validate();
  const std::vector<double> loads = config.load_axis();

  struct Job {
    DataRate dr;
    Strategy strategy;
    double load;
  };
  std::vector<Job> jobs;
  for (DataRate dr : config.rates)
    for (Strategy st : config.strategies)
      for (double load : loads) jobs.push_back({dr, st, load});

  auto evaluate = [&config](const Job& job) {
    const DataRateProfile profile = profile_for(job.dr, config);
    const NetworkScenario scenario = load_to_scenario(job.load, config, profile);
    const SuccessBreakdown s = analytic_point(scenario, job.strategy, config);
    SweepRow row;
    row.dr = job.dr;
    row.strategy = job.strategy;
    row.load_mbps = job.load;
    row.s_header = s.header;
    row.s_payload = s.payload;
    row.s_total = s.total;
    row.goodput_mbps = goodput_per_gateway(scenario, s.total) / 1e6;
    if (config.mc_enabled) {
      mc::EstimateOptions opts;
      opts.trials = config.trials;
      opts.seed = config.seed;
      opts.workers = config.workers;
      opts.sampling = sampling_for(job.strategy, config);
      const mc::Estimate e = mc::estimate(scenario, opts);
      const mc::EstimateWithCI& total =
          job.strategy == Strategy::macro ? e.macro.total : e.nearest.total;
      row.mc_s_total = total.mean;
      row.mc_std_error = total.std_error;
    }
    return row;
  };

  std::vector<SweepRow> rows(jobs.size());
  if (config.mc_enabled) {
    // The estimator already spreads trials over the workers.
    for (std::size_t i = 0; i < jobs.size(); ++i) rows[i] = evaluate(jobs[i]);
  } else {
    const unsigned n_threads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                               static_cast<unsigned>(jobs.size())));
    std::vector<std::future<void>> tasks;
    for (unsigned t = 0; t < n_threads; ++t) {
      tasks.push_back(std::async(std::launch::async, [&, t] {
        for (std::size_t i = t; i < jobs.size(); i += n_threads) rows[i] = evaluate(jobs[i]);
      }));
    }
    for (auto& task : tasks) task.get();
  }
  std::stable_sort(rows.begin(), rows.end(), row_order);
  return rows;
}

ThresholdResult find_threshold_load(const SweepConfig& config, DataRate dr, Strategy strategy,
                                    double target) {
  if (!(target > 0.0 && target < 1.0)) throw DomainError("target probability must lie in (0, 1)");
  const DataRateProfile profile = profile_for(dr, config);
  ThresholdResult out{dr, strategy, target, std::nullopt, 0.0, "ok"};

  double lo = config.load_min_mbps;
  double hi = config.load_max_mbps;
  const double s_lo = s_total_at(config, profile, strategy, lo);
  const double s_hi = s_total_at(config, profile, strategy, hi);
  if (s_lo < target) {
    out.status = "below_range";
    out.s_total = s_lo;
    return out;
  }
  if (s_hi > target) {
    out.status = "above_range";
    out.s_total = s_hi;
    return out;
  }
  for (int iter = 0; iter < 200 && (hi - lo) > 1e-6 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (s_total_at(config, profile, strategy, mid) >= target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if ((hi - lo) > 1e-6 * hi) throw NumericalError("threshold bisection did not converge");
  const double load = 0.5 * (lo + hi);
  out.load_mbps = load;
  out.s_total = s_total_at(config, profile, strategy, load);
  return out;
}

std::vector<ThresholdResult> find_threshold_loads(const SweepConfig& config, double target) {
  config.validate();
  std::vector<ThresholdResult> out;
  for (DataRate dr : config.rates)
    for (Strategy st : config.strategies) out.push_back(find_threshold_load(config, dr, st, target));
  return out;
}

std::string config_comment(const SweepConfig& config) {
  std::ostringstream os;
  os << "# lrfhss sweep\n";
  std::istringstream cfg(config_to_json(config));
  for (std::string line; std::getline(cfg, line);) os << "# " << line << '\n';
  os << "# assumption: fragment_count = ceil(8 * payload_bytes / mu / fragment_bits)\n"
     << "# assumption: t_H = header_bits / 488 bps, t_P = fragment_bits / 488 bps\n"
     << "# assumption: B_T = R * header_bits + L * fragment_bits\n"
     << "# assumption: goodput = S * eta_d * lambda_d / lambda_g * 8 * payload_bytes\n";
  return os.str();
}

std::string to_csv(const std::vector<SweepRow>& rows, std::string_view comment) {
  std::ostringstream os;
  os << comment << kCsvHeader << '\n';
  for (const SweepRow& r : rows) {
    os << to_string(r.dr) << ',' << to_string(r.strategy) << ',' << fmt_shortest(r.load_mbps)
       << ',' << fmt_probability(r.s_header) << ',' << fmt_probability(r.s_payload) << ','
       << fmt_probability(r.s_total) << ',' << fmt_shortest(r.goodput_mbps) << ','
       << (r.mc_s_total ? fmt_probability(*r.mc_s_total) : "") << ','
       << (r.mc_std_error ? fmt_probability(*r.mc_std_error) : "") << '\n';
  }
  return os.str();
}

std::vector<SweepRow> parse_csv(std::string_view text) {
  std::vector<SweepRow> rows;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kCsvHeader)
        throw DomainError("CSV line " + std::to_string(line_no) + ": unexpected header");
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 9)
      throw DomainError("CSV line " + std::to_string(line_no) + ": expected 9 fields, got " +
                        std::to_string(f.size()));
    SweepRow r;
    r.dr = parse_data_rate(f[0]);
    r.strategy = parse_strategy(f[1]);
    r.load_mbps = parse_double(f[2], line_no);
    r.s_header = parse_double(f[3], line_no);
    r.s_payload = parse_double(f[4], line_no);
    r.s_total = parse_double(f[5], line_no);
    r.goodput_mbps = parse_double(f[6], line_no);
    if (!f[7].empty()) r.mc_s_total = parse_double(f[7], line_no);
    if (!f[8].empty()) r.mc_std_error = parse_double(f[8], line_no);
    rows.push_back(r);
  }
  if (!header_seen) throw DomainError("CSV has no header line");
  return rows;
}

std::string config_to_json(const SweepConfig& c) {
  json j;
  std::vector<std::string> rates;
  for (DataRate dr : c.rates) rates.emplace_back(to_string(dr));
  std::vector<std::string> strategies;
  for (Strategy s : c.strategies) strategies.emplace_back(to_string(s));
  j["dr"] = rates;
  j["strategy"] = strategies;
  j["load_min"] = c.load_min_mbps;
  j["load_max"] = c.load_max_mbps;
  j["points"] = c.points;
  j["log_axis"] = c.log_axis;
  j["include_zero"] = c.include_zero;
  j["alpha"] = c.alpha;
  j["sigma_h_db"] = c.sigma_h_db;
  j["sigma_p_db"] = c.sigma_p_db;
  j["payload_bytes"] = c.payload_bytes ? json(*c.payload_bytes) : json(nullptr);
  j["nearest_conditioning"] = conditioning_name(c.conditioning);
  j["mc"] = c.mc_enabled;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["mc_coupling"] = coupling_name(c.coupling);
  j["format"] = c.format == Format::csv ? "csv" : "json";
  return j.dump(2);
}

std::string to_json(const std::vector<SweepRow>& rows, const SweepConfig& config) {
  json j;
  j["config"] = json::parse(config_to_json(config));
  json arr = json::array();
  for (const SweepRow& r : rows) {
    json o;
    o["dr"] = to_string(r.dr);
    o["strategy"] = to_string(r.strategy);
    o["load_mbps"] = r.load_mbps;
    o["s_header"] = r.s_header;
    o["s_payload"] = r.s_payload;
    o["s_total"] = r.s_total;
    o["goodput_mbps"] = r.goodput_mbps;
    o["mc_s_total"] = r.mc_s_total ? json(*r.mc_s_total) : json(nullptr);
    o["mc_std_error"] = r.mc_std_error ? json(*r.mc_std_error) : json(nullptr);
    arr.push_back(std::move(o));
  }
  j["rows"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::string thresholds_to_csv(const std::vector<ThresholdResult>& results,
                              std::string_view comment) {
  std::ostringstream os;
  os << comment << "dr,strategy,target,load_mbps,s_total,status\n";
  for (const ThresholdResult& r : results) {
    os << to_string(r.dr) << ',' << to_string(r.strategy) << ',' << fmt_probability(r.target)
       << ',' << (r.load_mbps ? fmt_shortest(*r.load_mbps) : "") << ','
       << fmt_probability(r.s_total) << ',' << r.status << '\n';
  }
  return os.str();
}

std::string thresholds_to_json(const std::vector<ThresholdResult>& results,
                               const SweepConfig& config) {
  json j;
  j["config"] = json::parse(config_to_json(config));
  json arr = json::array();
  for (const ThresholdResult& r : results) {
    arr.push_back({{"dr", to_string(r.dr)},
                   {"strategy", to_string(r.strategy)},
                   {"target", r.target},
                   {"load_mbps", r.load_mbps ? json(*r.load_mbps) : json(nullptr)},
                   {"s_total", r.s_total},
                   {"status", r.status}});
  }
  j["thresholds"] = std::move(arr);
  return j.dump(2) + "\n";
}

void apply_config_json(std::string_view json_text, SweepConfig& c) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw DomainError("config must be a JSON object");

  const auto list = [](const json& v) {
    std::vector<std::string> out;
    if (v.is_array()) {
      for (const auto& x : v) out.push_back(x.get<std::string>());
    } else {
      out.push_back(v.get<std::string>());
    }
    return out;
  };

  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "dr") {
        c.rates.clear();
        for (const auto& s : list(v)) {
          if (s == "both") {
            c.rates = {DataRate::DR5, DataRate::DR6};
          } else {
            c.rates.push_back(parse_data_rate(s));
          }
        }
      } else if (key == "strategy") {
        c.strategies.clear();
        for (const auto& s : list(v)) {
          if (s == "both") {
            c.strategies = {Strategy::macro, Strategy::nearest};
          } else {
            c.strategies.push_back(parse_strategy(s));
          }
        }
      } else if (key == "load_min") {
        c.load_min_mbps = v.get<double>();
      } else if (key == "load_max") {
        c.load_max_mbps = v.get<double>();
      } else if (key == "points") {
        c.points = v.get<int>();
      } else if (key == "log_axis") {
        c.log_axis = v.get<bool>();
      } else if (key == "include_zero") {
        c.include_zero = v.get<bool>();
      } else if (key == "alpha") {
        c.alpha = v.get<double>();
      } else if (key == "sigma_h_db") {
        c.sigma_h_db = v.get<double>();
      } else if (key == "sigma_p_db") {
        c.sigma_p_db = v.get<double>();
      } else if (key == "payload_bytes") {
        c.payload_bytes = v.is_null() ? std::nullopt : std::optional<int>(v.get<int>());
      } else if (key == "nearest_conditioning") {
        const auto s = v.get<std::string>();
        if (s == "factorized") {
          c.conditioning = nearest::Conditioning::factorized;
        } else if (s == "joint") {
          c.conditioning = nearest::Conditioning::joint;
        } else {
          throw DomainError("unknown nearest_conditioning '" + s + "'");
        }
      } else if (key == "mc") {
        c.mc_enabled = v.get<bool>();
      } else if (key == "trials") {
        c.trials = v.get<std::uint64_t>();
      } else if (key == "seed") {
        c.seed = v.get<std::uint64_t>();
      } else if (key == "workers") {
        c.workers = v.get<unsigned>();
      } else if (key == "mc_coupling") {
        const auto s = v.get<std::string>();
        if (s == "model") {
          c.coupling = McCoupling::model;
        } else if (s == "physical") {
          c.coupling = McCoupling::physical;
        } else {
          throw DomainError("unknown mc_coupling '" + s + "'");
        }
      } else if (key == "out") {
        c.output = v.get<std::string>();
      } else if (key == "format") {
        const auto s = v.get<std::string>();
        if (s == "csv") {
          c.format = Format::csv;
        } else if (s == "json") {
          c.format = Format::json;
        } else {
          throw DomainError("unknown format '" + s + "'");
        }
      } else {
        throw DomainError("unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw DomainError(std::string("config value has the wrong type: ") + e.what());
  }
}

SweepConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  SweepConfig c;
  apply_config_json(text.str(), c);
  return c;
}

void write_atomically(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(path.string() + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw IoError(path.string() + ": write failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError(path.string() + ": " + ec.message());
  }
}

}  // namespace lrfhss::sweep
