// Acceptance suite: one status line per criterion, indented details below.
//
// PASS  the criterion holds as stated.
// FAIL  it does not; the details say where.
// MISS  an approximate target that depends on undocumented packet timing;
//       the details carry the sensitivity of the result to those inputs.
//
// Criteria 1-4 gate the exit status. The others are reported.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "lrfhss/hopping.hpp"
#include "lrfhss/model.hpp"
#include "lrfhss/montecarlo.hpp"
#include "lrfhss/nearest.hpp"
#include "lrfhss/quadrature.hpp"
#include "lrfhss/sweep.hpp"
#include "oracles.hpp"

namespace {

using namespace lrfhss;
using Clock = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Report {
  bool hard_gate_ok = true;

  void line(int id, const char* status, const std::string& what) {
    std::printf("%-4s criterion %d: %s\n", status, id, what.c_str());
    std::fflush(stdout);
  }
  void detail(const std::string& text) {
    std::printf("        %s\n", text.c_str());
    std::fflush(stdout);
  }
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

const char* dr_name(DataRate dr) { return dr == DataRate::DR5 ? "DR5" : "DR6"; }

// ---- 1 -----------------------------------------------------------------------

void exact_identity(Report& r) {
  const auto t0 = Clock::now();
  bool ok = true;
  double worst = 0.0;
  for (int n = 1; n <= 20; ++n) {
    const oracle::Rational sum = oracle::alternating_binomial_sum(n);
    ok = ok && sum == -oracle::harmonic(n);
    worst = std::max(worst, std::abs(k2(n) - static_cast<double>(sum)));
  }
  ok = ok && worst < 1e-14;
  const double dt = seconds_since(t0);
  ok = ok && dt < 1.0;
  r.line(1, ok ? "PASS" : "FAIL", "K2(R) = -H_R for R = 1..20 in exact rationals");
  r.detail(fmt("double k2 vs rational: max |diff| %.2e; runtime %.3f s (limit 1 s)", worst, dt));
  r.hard_gate_ok = r.hard_gate_ok && ok;
}

// ---- 2 -----------------------------------------------------------------------

void closed_form_vs_integral(Report& r) {
  const auto t0 = Clock::now();
  const std::vector<double> alphas{2.5, 3.0, 3.5, 4.0};
  const std::vector<double> sigmas_db{-25.0, -22.0, -19.0, -16.0, -13.0, -10.0};
  std::vector<double> ratios;
  for (int i = 0; i < 8; ++i) ratios.push_back(std::pow(10.0, -2.0 + 3.0 * i / 7.0));
  const int replicas = 3;

  QuadratureSpec quad;
  quad.rel_tol = 1e-12;
  double worst = 0.0;
  int cases = 0;
  for (double alpha : alphas) {
    for (double db : sigmas_db) {
      for (double ratio : ratios) {
        const double sigma = db_to_linear(db);
        const double lambda_hat = 1.0 / ratio;  // lambda_g = 1
        const double a = geometry_constant(alpha) * lambda_hat * std::pow(sigma, 2.0 / alpha);
        // Beyond this range the integrand is below R e^-60 of its peak.
        const double y_max = std::sqrt(60.0 / a);
        const double mean_decoders =
            integrate(
                [&](double y) {
                  return 2.0 * kPi * y * link_success(y, alpha, lambda_hat, sigma, replicas);
                },
                0.0, y_max, quad)
                .value;
        const double numeric = -std::expm1(-mean_decoders);
        const double closed = macro_success(alpha, sigma, replicas, ratio);
        worst = std::max(worst, std::abs(numeric - closed) / closed);
        ++cases;
      }
    }
  }
  const double dt = seconds_since(t0);
  const bool ok = worst <= 1e-9 && dt < 10.0;
  r.line(2, ok ? "PASS" : "FAIL",
         "macro header closed form vs integrated per-gateway success, 4x6x8 grid");
  r.detail(fmt("%d cases, max relative error %.2e (limit 1e-9); runtime %.2f s (limit 10 s)",
               cases, worst, dt));
  r.hard_gate_ok = r.hard_gate_ok && ok;
}

// ---- 3 -----------------------------------------------------------------------

void binomial_oracle(Report& r) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int cases = 0;
  for (int n = 1; n <= 12; ++n) {
    for (int k = 0; k <= n; ++k) {
      for (double p : {0.1, 0.5, 0.9}) {
        worst = std::max(worst, std::abs(binomial_upper_tail(n, k, p) -
                                         oracle::enumerate_upper_tail(n, k, p)));
        ++cases;
      }
    }
    for (double mu : {0.1, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.9}) {
      for (double p : {0.1, 0.5, 0.9}) {
        const int k = static_cast<int>(std::ceil(mu * n - 1e-9));
        worst = std::max(worst, std::abs(payload_success(p, n, mu) -
                                         oracle::enumerate_upper_tail(n, k, p)));
        ++cases;
      }
    }
  }
  const double dt = seconds_since(t0);
  const bool ok = worst <= 1e-12 && dt < 5.0;
  r.line(3, ok ? "PASS" : "FAIL", "payload success vs exhaustive enumeration, L <= 12");
  r.detail(fmt("%d cases, max |diff| %.2e (limit 1e-12); runtime %.2f s (limit 5 s)", cases,
               worst, dt));
  r.hard_gate_ok = r.hard_gate_ok && ok;
}

// ---- 4 -----------------------------------------------------------------------

NetworkScenario table_scenario(DataRate dr, double load_mbps) {
  sweep::SweepConfig c;
  return sweep::load_to_scenario(load_mbps, c, sweep::profile_for(dr, c));
}

// Standard error of a trials-sized proportion at the closed-form value, the
// scale under the hypothesis being tested. It stays meaningful when the
// estimate sits at exactly 0 or 1.
double z_score(const mc::EstimateWithCI& e, double p) {
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(e.trials));
  if (se == 0.0) return e.mean == p ? 0.0 : INFINITY;
  return (e.mean - p) / se;
}

void mc_validation(Report& r) {
  const auto t0 = Clock::now();
  const std::uint64_t trials = 100000;
  int checks = 0;
  int inside = 0;
  double worst = 0.0;
  std::vector<std::string> lines;
  for (DataRate dr : {DataRate::DR5, DataRate::DR6}) {
    for (int i = 1; i <= 10; ++i) {
      const double load = i;
      const NetworkScenario s = table_scenario(dr, load);
      mc::EstimateOptions o;
      o.trials = trials;
      o.seed = 1;
      o.sampling = mc::SamplingModel::macro_model();
      const mc::Estimate e = mc::estimate(s, o);
      const SuccessBreakdown a = total_success(s);
      const double z[3] = {z_score(e.macro.header, a.header), z_score(e.macro.payload, a.payload),
                           z_score(e.macro.total, a.total)};
      for (double v : z) {
        ++checks;
        inside += std::abs(v) <= 3.0;
        worst = std::max(worst, std::abs(v));
      }
      lines.push_back(fmt("%s %4.1f Mbps  S^H %.5f/%.5f (z %+.2f)  S^P %.5f/%.5f (z %+.2f)  "
                          "S %.5f/%.5f (z %+.2f)",
                          dr_name(dr), load, e.macro.header.mean, a.header, z[0],
                          e.macro.payload.mean, a.payload, z[1], e.macro.total.mean, a.total,
                          z[2]));
    }
  }
  const double dt = seconds_since(t0);
  const bool ok = inside == checks;
  r.line(4, ok ? "PASS" : "FAIL",
         "macro Monte Carlo vs closed forms, 10 loads per DR, 1e5 trials, within 3 standard "
         "errors");
  r.detail(fmt("%d/%d checks inside 3 standard errors, max |z| %.2f; runtime %.1f s "
               "(target 300 s on a desktop CPU)",
               inside, checks, worst, dt));
  r.detail("columns are MC/closed form; sampling: per-message gateway fields, per-link "
           "interferers, seed 1");
  for (const auto& l : lines) r.detail(l);

  // How far the closed forms are from a deployment where every message of a
  // packet sees the same gateways and each message one interferer field.
  for (auto [dr, load] : {std::pair{DataRate::DR5, 7.9}, std::pair{DataRate::DR6, 4.2}}) {
    const NetworkScenario s = table_scenario(dr, load);
    mc::EstimateOptions o;
    o.trials = 10000;
    o.sampling = mc::SamplingModel::physical();
    const mc::Estimate e = mc::estimate(s, o);
    const SuccessBreakdown a = total_success(s);
    r.detail(fmt("info: shared-geometry sampling, %s %.1f Mbps: S %.4f +- %.4f vs closed form "
                 "%.4f (S^P %.4f vs %.4f)",
                 dr_name(dr), load, e.macro.total.mean, e.macro.total.std_error, a.total,
                 e.macro.payload.mean, a.payload));
  }
  r.hard_gate_ok = r.hard_gate_ok && ok;
}

// ---- 5 -----------------------------------------------------------------------

struct Perturbation {
  double header_time = 1.0;
  double fragment_time = 1.0;
  int fragment_delta = 0;
};

// s_total at a load, with airtimes and fragment count perturbed independently
// of the bit counts that define the load.
double perturbed_success(DataRate dr, sweep::Strategy strategy, double load_mbps,
                         const Perturbation& pert) {
  sweep::SweepConfig c;
  const DataRateProfile profile = sweep::profile_for(dr, c);
  NetworkScenario s;
  s.profile = profile;
  s.payload_bytes = profile.max_payload_bytes;
  AirtimeModel air = airtimes(s);
  air.header_duration *= pert.header_time;
  air.fragment_duration *= pert.fragment_time;
  air.fragment_count += pert.fragment_delta;
  s.packet_rate = load_mbps * 1e6 / total_packet_bits(profile, air.fragment_count);
  return strategy == sweep::Strategy::macro ? total_success(s, air).total
                                            : nearest::total_success(s, air).total;
}

double crossing(DataRate dr, sweep::Strategy strategy, const Perturbation& pert) {
  double lo = 1e-3;
  double hi = 100.0;
  while (hi - lo > 1e-7 * hi) {
    const double mid = 0.5 * (lo + hi);
    (perturbed_success(dr, strategy, mid, pert) >= 0.8 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void paper_thresholds(Report& r) {
  struct Target {
    DataRate dr;
    sweep::Strategy strategy;
    double reference;
  };
  const Target targets[] = {{DataRate::DR5, sweep::Strategy::macro, 7.9},
                            {DataRate::DR6, sweep::Strategy::macro, 4.2},
                            {DataRate::DR5, sweep::Strategy::nearest, 1.7},
                            {DataRate::DR6, sweep::Strategy::nearest, 0.63}};
  sweep::SweepConfig c;
  c.load_max_mbps = 50.0;
  std::vector<std::string> lines;
  int hits = 0;
  std::vector<const Target*> misses;
  for (const Target& t : targets) {
    const auto res = sweep::find_threshold_load(c, t.dr, t.strategy, 0.8);
    const double load = res.load_mbps.value_or(NAN);
    const double rel = load / t.reference - 1.0;
    const bool hit = std::abs(rel) <= 0.2;
    hits += hit;
    if (!hit) misses.push_back(&t);
    lines.push_back(fmt("%s %-7s crossing %.3f Mbps vs %.2f (%+.1f%%) %s", dr_name(t.dr),
                        std::string(sweep::to_string(t.strategy)).c_str(), load, t.reference,
                        100.0 * rel, hit ? "within 20%" : "outside 20%"));
  }
  r.line(5, hits == 4 ? "PASS" : "MISS",
         fmt("0.8-success crossing loads vs reference values, +-20%% (%d/4 within)", hits));
  for (const auto& l : lines) r.detail(l);
  for (const Target* t : misses) {
    const double base = crossing(t->dr, t->strategy, {});
    const double h = crossing(t->dr, t->strategy, {1.1, 1.0, 0});
    const double f = crossing(t->dr, t->strategy, {1.0, 1.1, 0});
    const double both = crossing(t->dr, t->strategy, {2.0, 2.0, 0});
    const double lp = crossing(t->dr, t->strategy, {1.0, 1.0, +4});
    const double lm = crossing(t->dr, t->strategy, {1.0, 1.0, -4});
    r.detail(fmt("sensitivity %s %s: d ln(load)/d ln(t_H) %.2f, d ln(load)/d ln(t_P) %.2f; "
                 "t_H,t_P x2 -> %.3f Mbps; L%+d -> %.3f, L%+d -> %.3f Mbps",
                 dr_name(t->dr), std::string(sweep::to_string(t->strategy)).c_str(),
                 std::log(h / base) / std::log(1.1), std::log(f / base) / std::log(1.1), both, 4,
                 lp, -4, lm));
    const double joint = [&] {
      sweep::SweepConfig cj = c;
      cj.conditioning = nearest::Conditioning::joint;
      return sweep::find_threshold_load(cj, t->dr, t->strategy, 0.8).load_mbps.value_or(NAN);
    }();
    if (t->strategy == sweep::Strategy::nearest)
      r.detail(fmt("  joint distance conditioning gives %.3f Mbps", joint));
  }
  if (!misses.empty())
    r.detail("a miss here is reported, not gated: packet airtimes and fragment counts are "
             "assumptions");
}

// ---- 6 -----------------------------------------------------------------------

struct Peak {
  double goodput = 0.0;
  double load = 0.0;
};

double goodput_mbps(DataRate dr, sweep::Strategy strategy, double load) {
  sweep::SweepConfig c;
  const NetworkScenario s = sweep::load_to_scenario(load, c, sweep::profile_for(dr, c));
  return goodput_per_gateway(s, sweep::analytic_point(s, strategy, c).total) / 1e6;
}

Peak peak_goodput(DataRate dr, sweep::Strategy strategy, double max_load) {
  Peak best;
  for (double load = 0.01; load <= max_load; load += 0.01) {
    const double g = goodput_mbps(dr, strategy, load);
    if (g > best.goodput) best = {g, load};
  }
  // Golden-section refinement around the grid maximum.
  double a = std::max(1e-3, best.load - 0.01);
  double b = best.load + 0.01;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 60; ++i) {
    const double x1 = b - inv_phi * (b - a);
    const double x2 = a + inv_phi * (b - a);
    (goodput_mbps(dr, strategy, x1) < goodput_mbps(dr, strategy, x2) ? a : b) =
        (goodput_mbps(dr, strategy, x1) < goodput_mbps(dr, strategy, x2) ? x1 : x2);
  }
  const double x = 0.5 * (a + b);
  return {goodput_mbps(dr, strategy, x), x};
}

void goodput_shape(Report& r) {
  const double max_load = 20.0;
  const Peak m5 = peak_goodput(DataRate::DR5, sweep::Strategy::macro, max_load);
  const Peak m6 = peak_goodput(DataRate::DR6, sweep::Strategy::macro, max_load);
  const Peak n5 = peak_goodput(DataRate::DR5, sweep::Strategy::nearest, max_load);
  const Peak n6 = peak_goodput(DataRate::DR6, sweep::Strategy::nearest, max_load);
  const bool dr6_higher = m6.goodput > m5.goodput;
  const bool dr6_earlier = m6.load < m5.load;
  const double macro_floor = std::min(m5.goodput, m6.goodput);
  const bool nearest_below = n5.goodput < macro_floor && n6.goodput < macro_floor;
  const double rel6 = m6.goodput / 1.9 - 1.0;
  const double rel5 = m5.goodput / 1.6 - 1.0;
  const bool peaks_close = std::abs(rel6) <= 0.2 && std::abs(rel5) <= 0.2;
  const bool shape = dr6_higher && nearest_below;
  const char* status = !shape ? "FAIL" : (peaks_close ? "PASS" : "MISS");
  r.line(6, status, "goodput shape: DR6 macro peak above DR5, nearest curves below both macro "
                    "peaks, peaks near 1.9/1.6 Mbps");
  r.detail(fmt("macro peaks: DR5 %.3f Mbps at %.2f Mbps load (%+.1f%% vs 1.6), DR6 %.3f at %.2f "
               "(%+.1f%% vs 1.9)",
               m5.goodput, m5.load, 100 * rel5, m6.goodput, m6.load, 100 * rel6));
  r.detail(fmt("DR6 peaks higher: %s; DR6 peaks at lower load: %s", dr6_higher ? "yes" : "no",
               dr6_earlier ? "yes" : "no"));
  r.detail(fmt("nearest maxima over 0-%.0f Mbps: DR5 %.3f, DR6 %.3f; below both macro peaks: %s",
               max_load, n5.goodput, n6.goodput, nearest_below ? "yes" : "no"));
}

// ---- 7 -----------------------------------------------------------------------

void dominance(Report& r) {
  sweep::SweepConfig c;  // default sweep: both DRs, 50 points over 0.1-20 Mbps
  std::vector<std::string> lines;
  int points = 0;
  int analytic_violations = 0;
  for (auto cond : {nearest::Conditioning::factorized, nearest::Conditioning::joint}) {
    c.conditioning = cond;
    const char* name = cond == nearest::Conditioning::factorized ? "factorized" : "joint";
    for (DataRate dr : {DataRate::DR5, DataRate::DR6}) {
      int violations = 0;
      double first = NAN;
      double worst_gap = 0.0;
      for (double load : c.load_axis()) {
        const NetworkScenario s = sweep::load_to_scenario(load, c, sweep::profile_for(dr, c));
        const double m = sweep::analytic_point(s, sweep::Strategy::macro, c).total;
        const double n = sweep::analytic_point(s, sweep::Strategy::nearest, c).total;
        ++points;
        if (n > m) {
          ++violations;
          if (std::isnan(first)) first = load;
          worst_gap = std::max(worst_gap, n - m);
        }
      }
      analytic_violations += violations;
      if (violations > 0) {
        lines.push_back(fmt("analytic, %s conditioning, %s: nearest above macro at %d/%zu "
                            "points from %.2f Mbps (largest excess %.4f)",
                            name, dr_name(dr), violations, c.load_axis().size(), first,
                            worst_gap));
      }
    }
  }

  std::uint64_t mc_trials = 0;
  std::uint64_t mc_violations = 0;
  c.conditioning = nearest::Conditioning::factorized;
  for (DataRate dr : {DataRate::DR5, DataRate::DR6}) {
    for (double load : c.load_axis()) {
      const NetworkScenario s = sweep::load_to_scenario(load, c, sweep::profile_for(dr, c));
      for (const auto& [sampling, trials] :
           {std::pair{mc::SamplingModel::macro_model(), std::uint64_t{2000}},
            std::pair{mc::SamplingModel::physical(), std::uint64_t{300}}}) {
        mc::EstimateOptions o;
        o.trials = trials;
        o.sampling = sampling;
        o.seed = 7;
        const mc::Estimate e = mc::estimate(s, o);
        mc_trials += trials;
        mc_violations += e.dominance_violations;
      }
    }
  }
  const bool ok = analytic_violations == 0 && mc_violations == 0;
  r.line(7, ok ? "PASS" : "FAIL",
         "nearest success <= macro success on every sweep point, analytic and paired MC");
  r.detail(fmt("analytic: %d violations over %d (point, conditioning) pairs", analytic_violations,
               points));
  for (const auto& l : lines) r.detail(l);
  r.detail(fmt("paired MC: %llu violations in %llu trials (independence-matched and "
               "shared-geometry sampling)",
               static_cast<unsigned long long>(mc_violations),
               static_cast<unsigned long long>(mc_trials)));
  if (analytic_violations > 0) {
    r.detail("the macro payload law is a binomial at the mean fragment success; the nearest law "
             "keeps fragments correlated through the common distance, which fattens its tail "
             "once the mean falls below the recovery fraction");
  }
}

// ---- 8 -----------------------------------------------------------------------

void hopping_structure(Report& r) {
  const Channelization ch{};
  const hopping::GridPlan plan = hopping::build_grid_plan(ch);
  const int length = 31;
  const long target_hops = 1000000;
  std::vector<long> counts(ch.grid_size, 0);
  long hops = 0;
  bool confined = true;
  bool distinct = true;
  for (std::uint32_t id = 0; hops < target_hops; ++id) {
    const int grid = static_cast<int>(id % ch.grid_count);
    const hopping::HopSequence s = hopping::generate_sequence(id, 0x5eed, grid, length, ch);
    for (std::size_t i = 0; i < s.hops.size() && hops < target_hops; ++i) {
      const int h = s.hops[i];
      confined = confined && h >= 0 && h < ch.grid_size && plan.obw_index[grid][h] % ch.grid_count == grid;
      distinct = distinct && (i == 0 || h != s.hops[i - 1]);
      ++counts[h];
      ++hops;
    }
  }
  const double expected = static_cast<double>(hops) / ch.grid_size;
  double chi2 = 0.0;
  double max_rel = 0.0;
  for (long n : counts) {
    chi2 += (n - expected) * (n - expected) / expected;
    max_rel = std::max(max_rel, std::abs(n - expected) / expected);
  }
  const double chi2_limit = 98.32;  // upper 0.1% point, 59 degrees of freedom
  const bool chi2_ok = chi2 < chi2_limit;
  const bool band_ok = max_rel <= 0.01;

  long hits = 0;
  long pair_hops = 0;
  for (std::uint32_t i = 0; i < 10000; ++i) {
    const auto a = hopping::generate_sequence(2 * i, 99, 17, length, ch);
    const auto b = hopping::generate_sequence(2 * i + 1, 99, 17, length, ch);
    hits += static_cast<long>(hopping::collision_check(a, b, plan).size());
    pair_hops += length;
  }
  const double p = 1.0 / ch.grid_size;
  const double rate = static_cast<double>(hits) / pair_hops;
  const double rate_z = (rate - p) / std::sqrt(p * (1 - p) / pair_hops);
  const bool collisions_ok = std::abs(rate_z) <= 3.0;

  const bool ok = confined && distinct && chi2_ok && band_ok && collisions_ok;
  r.line(8, ok ? "PASS" : "FAIL",
         "hop sequences: grid confinement, distinct adjacent hops, per-slot uniformity within "
         "+-1% over 1e6 hops, collision rate 1/60");
  r.detail(fmt("confinement %s, adjacent distinctness %s over %ld hops", confined ? "ok" : "BROKEN",
               distinct ? "ok" : "BROKEN", hops));
  r.detail(fmt("slot counts: chi-square %.1f on 59 df (0.1%% critical value %.2f): %s", chi2,
               chi2_limit, chi2_ok ? "uniform" : "not uniform"));
  r.detail(fmt("largest per-slot relative deviation %.2f%%: %s the +-1%% band", 100 * max_rel,
               band_ok ? "inside" : "outside"));
  if (!band_ok) {
    r.detail(fmt("with independent hops each slot count has relative sd %.2f%%, so the band is "
                 "+-%.2f sd; all 60 slots inside has probability about %.0e",
                 100 * std::sqrt((1 - p) / (p * hops)), 0.01 / std::sqrt((1 - p) / (p * hops)),
                 std::pow(std::erf(0.01 / std::sqrt((1 - p) / (p * hops)) / std::sqrt(2.0)), 60)));
  }
  r.detail(fmt("collision rate %.5f per hop over %ld aligned hops (1/60 = %.5f, z %+.2f)", rate,
               pair_hops, p, rate_z));
}

}  // namespace

int main() {
  Report report;
  const auto t0 = Clock::now();
  exact_identity(report);
  closed_form_vs_integral(report);
  binomial_oracle(report);
  mc_validation(report);
  paper_thresholds(report);
  goodput_shape(report);
  dominance(report);
  hopping_structure(report);
  std::printf("hard gate (criteria 1-4): %s; total runtime %.1f s\n",
              report.hard_gate_ok ? "PASS" : "FAIL", seconds_since(t0));
  return report.hard_gate_ok ? 0 : 1;
}
