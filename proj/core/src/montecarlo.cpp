#include "lrfhss/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "lrfhss/errors.hpp"
#include "lrfhss/rng.hpp"

namespace lrfhss::mc {
namespace {

constexpr double kPi = std::numbers::pi;

// Stream tags. Changing these changes every sampled value.
constexpr std::uint64_t kGatewayTag = 1;
constexpr std::uint64_t kLinkTag = 2;
constexpr std::uint64_t kFieldTag = 3;

Stream gateway_stream(std::uint64_t seed, std::uint64_t trial, std::size_t set) {
  return Stream::keyed(seed, {trial, kGatewayTag, set});
}
Stream link_stream(std::uint64_t seed, std::uint64_t trial, std::size_t message,
                   std::size_t gateway) {
  return Stream::keyed(seed, {trial, kLinkTag, message, gateway});
}
Stream field_stream(std::uint64_t seed, std::uint64_t trial, std::size_t message) {
  return Stream::keyed(seed, {trial, kFieldTag, message});
}

// Points of a homogeneous PPP in order of increasing range from the centre:
// pi * density * r_n^2 is a unit-rate Poisson process on the half line.
class RadialArrivals {
 public:
  RadialArrivals(double density, double limit) : density_(density), limit_(limit) {}

  // Draws (range, bearing). Returns false once the range passes the limit.
  bool next(Stream& rng, PolarPoint& out) {
    if (done_ || !(density_ > 0.0)) return false;
    area_ += rng.exponential() / (kPi * density_);
    const double range = std::sqrt(area_);
    if (range > limit_) {
      done_ = true;
      return false;
    }
    out.range = range;
    out.bearing = 2.0 * kPi * rng.uniform();
    return true;
  }

 private:
  double density_;
  double limit_;
  double area_ = 0.0;
  bool done_ = false;
};

double path_gain(double distance, double alpha) {
  return std::pow(std::max(distance, kMinDistance), -alpha);
}

std::size_t gateway_set_of(GatewayGeometry geometry, std::size_t message, int replicas) {
  const auto r = static_cast<std::size_t>(replicas);
  switch (geometry) {
    case GatewayGeometry::common:
      return 0;
    case GatewayGeometry::split:
      return message < r ? 0 : 1;
    case GatewayGeometry::per_message:
      return message < r ? 0 : 1 + (message - r);
  }
  return 0;
}

std::size_t gateway_set_count(GatewayGeometry geometry, int fragments) {
  switch (geometry) {
    case GatewayGeometry::common:
      return 1;
    case GatewayGeometry::split:
      return 2;
    case GatewayGeometry::per_message:
      return 1 + static_cast<std::size_t>(fragments);
  }
  return 1;
}

double sigma_for(const DataRateProfile& profile, bool header) {
  return header ? profile.sigma_header : profile.sigma_payload;
}

// Shared-field interferers can only lie within rho of a gateway if their
// range from the device is within rho of the gateway's. Both evaluation paths
// apply this filter before the distance test so they select the same points.
bool in_band(double point_range, double gateway_range, double rho) {
  return point_range > gateway_range - rho && point_range < gateway_range + rho;
}

// Interference-plus-noise seen by gateway `gateway` for `message`, summed in
// the canonical order: noise, far field, then stored interferers.
double impairment(const PppRealization& real, std::size_t message, std::size_t gateway,
                  double noise) {
  const MessageDraw& draw = real.messages[message];
  const double alpha = real.path_loss_alpha;
  double acc = noise + real.far_field_interference;
  if (real.sampling.interference == InterferenceField::per_link) {
    for (const Interferer& i : draw.interferers[gateway]) {
      acc += i.fading * path_gain(i.offset.range, alpha);
    }
  } else {
    const PolarPoint& gp = real.gateways_of(message)[gateway];
    const Point g = gp.cartesian();
    for (const Interferer& i : draw.interferers.front()) {
      if (!in_band(i.offset.range, gp.range, real.interference_radius)) continue;
      const Point p = i.offset.cartesian();
      const double d = std::hypot(p.x - g.x, p.y - g.y);
      if (d < real.interference_radius) acc += i.fading * path_gain(d, alpha);
    }
  }
  return acc;
}

double signal_of(const PppRealization& real, std::size_t message, std::size_t gateway) {
  const double y = real.gateways_of(message)[gateway].range;
  return real.messages[message].device_fading[gateway] * path_gain(y, real.path_loss_alpha);
}

// ---- lazy per-link evaluation ----------------------------------------------

class LazyGatewaySet {
 public:
  LazyGatewaySet(Stream rng, double density, double limit)
      : rng_(rng), arrivals_(density, limit) {}

  const PolarPoint* at(std::size_t k) {
    PolarPoint p;
    while (points_.size() <= k && arrivals_.next(rng_, p)) points_.push_back(p);
    return k < points_.size() ? &points_[k] : nullptr;
  }

 private:
  Stream rng_;
  RadialArrivals arrivals_;
  std::vector<PolarPoint> points_;
};

struct LinkContext {
  std::uint64_t seed;
  std::uint64_t trial;
  double alpha;
  double lambda_hat;
  double rho;
  double base;  // noise + far field
};

// Same draws, in the same order, as sample_realization for a per-link
// message; stops as soon as the outcome is known. Interference only grows,
// so an early failure is final.
bool lazy_link_decodes(const LinkContext& ctx, std::size_t message, std::size_t gateway,
                       double range, double sigma) {
  Stream rng = link_stream(ctx.seed, ctx.trial, message, gateway);
  const double signal = rng.exponential() * path_gain(range, ctx.alpha);
  double acc = ctx.base;
  if (sigma * acc >= signal) return false;
  RadialArrivals arrivals(ctx.lambda_hat, ctx.rho);
  PolarPoint p;
  while (arrivals.next(rng, p)) {
    acc += rng.exponential() * path_gain(p.range, ctx.alpha);
    if (sigma * acc >= signal) return false;
  }
  return signal > sigma * acc;
}

// One shared interferer field per message, drawn outward from the device
// only as far as some gateway needs it.
class LazyField {
 public:
  LazyField(Stream rng, double density, double limit) : rng_(rng), arrivals_(density, limit) {}

  // Afterwards every point with range below `range` has been drawn.
  void extend_to(double range) {
    PolarPoint p;
    while ((points_.empty() || points_.back().offset.range < range) && arrivals_.next(rng_, p)) {
      points_.push_back({p, rng_.exponential()});
      xy_.push_back(p.cartesian());
    }
  }

  const std::vector<Interferer>& points() const { return points_; }
  const std::vector<Point>& xy() const { return xy_; }

 private:
  Stream rng_;
  RadialArrivals arrivals_;
  std::vector<Interferer> points_;
  std::vector<Point> xy_;
};

bool shared_link_decodes(const LinkContext& ctx, LazyField& field, std::size_t message,
                         std::size_t gateway, const PolarPoint& g, double sigma) {
  Stream rng = link_stream(ctx.seed, ctx.trial, message, gateway);
  const double signal = rng.exponential() * path_gain(g.range, ctx.alpha);
  double acc = ctx.base;
  if (sigma * acc >= signal) return false;
  field.extend_to(g.range + ctx.rho);
  const auto& pts = field.points();
  const Point gxy = g.cartesian();
  const auto first = std::partition_point(pts.begin(), pts.end(), [&](const Interferer& i) {
    return !(i.offset.range > g.range - ctx.rho);
  });
  for (auto it = first; it != pts.end(); ++it) {
    if (!in_band(it->offset.range, g.range, ctx.rho)) {
      if (it->offset.range >= g.range + ctx.rho) break;
      continue;
    }
    const Point& p = field.xy()[static_cast<std::size_t>(it - pts.begin())];
    const double d = std::hypot(p.x - gxy.x, p.y - gxy.y);
    if (d < ctx.rho) {
      acc += it->fading * path_gain(d, ctx.alpha);
      if (sigma * acc >= signal) return false;
    }
  }
  return signal > sigma * acc;
}

TrialFlags lazy_trial(const NetworkScenario& scenario, double lambda_hat, const SimRegion& region,
                      const SamplingModel& sampling, std::uint64_t seed, std::uint64_t trial,
                      double noise) {
  const DataRateProfile& profile = scenario.profile;
  const int replicas = profile.header_replicas;
  const int fragments = fragment_count(scenario.payload_bytes, profile);
  const int needed = recovery_threshold(fragments, profile.recovery_fraction);

  const LinkContext ctx{
      seed,
      trial,
      scenario.path_loss_alpha,
      lambda_hat,
      region.interference_radius,
      noise + far_field_interference(lambda_hat, scenario.path_loss_alpha,
                                     region.interference_radius),
  };

  std::vector<std::optional<LazyField>> fields(static_cast<std::size_t>(replicas + fragments));
  auto link_decodes = [&](std::size_t m, std::size_t k, const PolarPoint& g, double sigma) {
    if (sampling.interference == InterferenceField::per_link)
      return lazy_link_decodes(ctx, m, k, g.range, sigma);
    if (!fields[m])
      fields[m].emplace(field_stream(seed, trial, m), lambda_hat,
                        region.radius + region.interference_radius);
    return shared_link_decodes(ctx, *fields[m], m, k, g, sigma);
  };

  std::vector<std::optional<LazyGatewaySet>> sets(gateway_set_count(sampling.geometry, fragments));
  auto gateways = [&](std::size_t message) -> LazyGatewaySet& {
    const std::size_t s = gateway_set_of(sampling.geometry, message, replicas);
    if (!sets[s]) sets[s].emplace(gateway_stream(seed, trial, s), scenario.gateway_density,
                                  region.radius);
    return *sets[s];
  };

  TrialFlags out;
  for (int m = 0; m < replicas && !out.nearest_header; ++m) {
    LazyGatewaySet& set = gateways(m);
    const PolarPoint* nearest = set.at(0);
    if (!nearest) break;
    if (link_decodes(m, 0, *nearest, profile.sigma_header)) {
      out.nearest_header = out.macro_header = true;
      break;
    }
    for (std::size_t k = 1; !out.macro_header; ++k) {
      const PolarPoint* g = set.at(k);
      if (!g) break;
      out.macro_header = link_decodes(m, k, *g, profile.sigma_header);
    }
  }

  int macro_count = 0;
  int nearest_count = 0;
  for (int i = 0; i < fragments; ++i) {
    if (macro_count >= needed && nearest_count >= needed) break;
    const std::size_t m = static_cast<std::size_t>(replicas + i);
    LazyGatewaySet& set = gateways(m);
    const PolarPoint* nearest = set.at(0);
    if (!nearest) continue;
    if (link_decodes(m, 0, *nearest, profile.sigma_payload)) {
      ++macro_count;
      ++nearest_count;
      continue;
    }
    if (macro_count >= needed) continue;
    for (std::size_t k = 1;; ++k) {
      const PolarPoint* g = set.at(k);
      if (!g) break;
      if (link_decodes(m, k, *g, profile.sigma_payload)) {
        ++macro_count;
        break;
      }
    }
  }
  out.macro_payload = macro_count >= needed;
  out.nearest_payload = nearest_count >= needed;
  return out;
}

}  // namespace

std::string_view to_string(GatewayGeometry g) {
  switch (g) {
    case GatewayGeometry::common:
      return "common";
    case GatewayGeometry::split:
      return "split";
    case GatewayGeometry::per_message:
      return "per-message";
  }
  return "?";
}

std::string_view to_string(InterferenceField f) {
  return f == InterferenceField::per_link ? "per-link" : "shared";
}

Point PolarPoint::cartesian() const {
  return {range * std::cos(bearing), range * std::sin(bearing)};
}

double far_field_interference(double lambda_hat, double alpha, double rho) {
  if (!(lambda_hat > 0.0)) return 0.0;
  if (!(rho > 0.0)) throw DomainError("interference radius must be positive when interferers exist");
  return lambda_hat * 2.0 * kPi * std::pow(rho, 2.0 - alpha) / (alpha - 2.0);
}

SimRegion SimRegion::for_scenario(const NetworkScenario& scenario, double lambda_hat) {
  scenario.validate();
  SimRegion region;
  region.radius = 5.0 / std::sqrt(scenario.gateway_density);
  if (lambda_hat > 0.0) {
    const double alpha = scenario.path_loss_alpha;
    const double sigma = std::min(scenario.profile.sigma_header, scenario.profile.sigma_payload);
    // K(alpha) > pi, so per-link success at this range is below e^-18.
    const double decoding_range =
        std::sqrt(18.0 / (kPi * lambda_hat * std::pow(sigma, 2.0 / alpha)));
    region.radius = std::max(region.radius, decoding_range);
    region.interference_radius = 5.0 / std::sqrt(lambda_hat);
  }
  region.validate(scenario.gateway_density);
  return region;
}

void SimRegion::validate(double gateway_density) const {
  if (!(radius > 0.0)) throw DomainError("simulation radius must be positive");
  if (!(interference_radius >= 0.0)) throw DomainError("interference radius must be non-negative");
  if (!(std::exp(-kPi * gateway_density * radius * radius) < 1e-12))
    throw DomainError("simulation radius too small: empty-window probability exceeds 1e-12");
}

PppRealization sample_realization(const NetworkScenario& scenario, double lambda_hat,
                                  const SimRegion& region, const SamplingModel& sampling,
                                  std::uint64_t seed, std::uint64_t trial) {
  scenario.validate();
  region.validate(scenario.gateway_density);
  if (!(lambda_hat >= 0.0)) throw DomainError("interferer density must be non-negative");
  if (lambda_hat > 0.0 && !(region.interference_radius > 0.0))
    throw DomainError("interference radius must be positive when interferers exist");

  const int replicas = scenario.profile.header_replicas;
  const int fragments = fragment_count(scenario.payload_bytes, scenario.profile);

  PppRealization real;
  real.sampling = sampling;
  real.path_loss_alpha = scenario.path_loss_alpha;
  real.interference_radius = region.interference_radius;
  real.far_field_interference =
      far_field_interference(lambda_hat, scenario.path_loss_alpha, region.interference_radius);
  real.header_replicas = replicas;

  real.gateway_sets.resize(gateway_set_count(sampling.geometry, fragments));
  for (std::size_t s = 0; s < real.gateway_sets.size(); ++s) {
    Stream rng = gateway_stream(seed, trial, s);
    RadialArrivals arrivals(scenario.gateway_density, region.radius);
    PolarPoint p;
    while (arrivals.next(rng, p)) real.gateway_sets[s].push_back(p);
  }

  const std::size_t messages = static_cast<std::size_t>(replicas + fragments);
  real.messages.resize(messages);
  for (std::size_t m = 0; m < messages; ++m) {
    MessageDraw& draw = real.messages[m];
    draw.gateway_set = gateway_set_of(sampling.geometry, m, replicas);
    const std::size_t n_gateways = real.gateway_sets[draw.gateway_set].size();
    draw.device_fading.resize(n_gateways);

    if (sampling.interference == InterferenceField::per_link) {
      draw.interferers.resize(n_gateways);
      for (std::size_t k = 0; k < n_gateways; ++k) {
        Stream rng = link_stream(seed, trial, m, k);
        draw.device_fading[k] = rng.exponential();
        RadialArrivals arrivals(lambda_hat, region.interference_radius);
        PolarPoint p;
        while (arrivals.next(rng, p)) draw.interferers[k].push_back({p, rng.exponential()});
      }
    } else {
      for (std::size_t k = 0; k < n_gateways; ++k) {
        Stream rng = link_stream(seed, trial, m, k);
        draw.device_fading[k] = rng.exponential();
      }
      draw.interferers.resize(1);
      Stream rng = field_stream(seed, trial, m);
      RadialArrivals arrivals(lambda_hat, region.radius + region.interference_radius);
      PolarPoint p;
      while (arrivals.next(rng, p)) draw.interferers[0].push_back({p, rng.exponential()});
    }
  }
  return real;
}

double sinr(const PppRealization& real, std::size_t message, std::size_t gateway, double noise) {
  if (message >= real.messages.size() || gateway >= real.gateways_of(message).size())
    throw DomainError("message or gateway index outside the realization");
  return signal_of(real, message, gateway) / impairment(real, message, gateway, noise);
}

bool decodes(const PppRealization& real, std::size_t message, std::size_t gateway, double sigma,
             double noise) {
  if (message >= real.messages.size() || gateway >= real.gateways_of(message).size())
    throw DomainError("message or gateway index outside the realization");
  return signal_of(real, message, gateway) > sigma * impairment(real, message, gateway, noise);
}

TrialOutcome evaluate_trial(const PppRealization& real, const DataRateProfile& profile,
                            double noise) {
  if (real.header_replicas != profile.header_replicas)
    throw DomainError("realization was sampled for a different header replica count");
  const int fragments = real.fragment_count();
  const int needed = recovery_threshold(fragments, profile.recovery_fraction);

  TrialOutcome out;
  out.header_decoded.assign(real.gateway_sets.front().size(), false);
  for (std::size_t m = 0; real.is_header(m); ++m) {
    const std::size_t n = real.gateways_of(m).size();
    for (std::size_t k = 0; k < n; ++k) {
      if (decodes(real, m, k, sigma_for(profile, true), noise)) {
        out.header_decoded[k] = true;
        if (k == 0) out.nearest_header = true;
      }
    }
  }
  out.macro_header = std::find(out.header_decoded.begin(), out.header_decoded.end(), true) !=
                     out.header_decoded.end();

  int nearest_count = 0;
  for (int i = 0; i < fragments; ++i) {
    const std::size_t m = static_cast<std::size_t>(profile.header_replicas + i);
    const std::size_t n = real.gateways_of(m).size();
    bool any = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (decodes(real, m, k, sigma_for(profile, false), noise)) {
        any = true;
        if (k == 0) ++nearest_count;
      }
    }
    if (any) out.fragments_received.push_back(static_cast<std::size_t>(i));
  }
  out.macro_payload = static_cast<int>(out.fragments_received.size()) >= needed;
  out.nearest_payload = nearest_count >= needed;
  out.macro_success = out.macro_header && out.macro_payload;
  out.nearest_success = out.nearest_header && out.nearest_payload;
  return out;
}

TrialFlags flags_of(const TrialOutcome& o) {
  return {o.macro_header, o.macro_payload, o.nearest_header, o.nearest_payload};
}

TrialFlags run_trial(const NetworkScenario& scenario, double lambda_hat, const SimRegion& region,
                     const SamplingModel& sampling, std::uint64_t seed, std::uint64_t trial,
                     double noise) {
  return lazy_trial(scenario, lambda_hat, region, sampling, seed, trial, noise);
}

EstimateWithCI EstimateWithCI::from_counts(std::uint64_t successes, std::uint64_t trials,
                                           std::uint64_t seed) {
  EstimateWithCI e;
  e.trials = trials;
  e.rng_seed = seed;
  if (trials == 0) return e;
  e.mean = static_cast<double>(successes) / static_cast<double>(trials);
  e.std_error = std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(trials));
  return e;
}

namespace {

struct Counts {
  std::uint64_t macro_header = 0, macro_payload = 0, macro_total = 0;
  std::uint64_t nearest_header = 0, nearest_payload = 0, nearest_total = 0;
  std::uint64_t violations = 0;

  void add(const TrialFlags& f) {
    macro_header += f.macro_header;
    macro_payload += f.macro_payload;
    macro_total += f.macro_success();
    nearest_header += f.nearest_header;
    nearest_payload += f.nearest_payload;
    nearest_total += f.nearest_success();
    violations += f.nearest_success() && !f.macro_success();
  }
  void merge(const Counts& o) {
    macro_header += o.macro_header;
    macro_payload += o.macro_payload;
    macro_total += o.macro_total;
    nearest_header += o.nearest_header;
    nearest_payload += o.nearest_payload;
    nearest_total += o.nearest_total;
    violations += o.violations;
  }
};

}  // namespace

Estimate estimate(const NetworkScenario& scenario, const EstimateOptions& options) {
  scenario.validate();
  if (options.trials < 1) throw DomainError("Monte Carlo needs at least one trial");
  if (!(options.noise >= 0.0)) throw DomainError("noise must be non-negative");

  const double lambda_hat = effective_interferer_density(scenario, airtimes(scenario));
  const SimRegion region = options.region.value_or(SimRegion::for_scenario(scenario, lambda_hat));
  region.validate(scenario.gateway_density);
  // Fail fast on configuration errors before spawning workers.
  (void)fragment_count(scenario.payload_bytes, scenario.profile);

  unsigned workers = options.workers ? options.workers : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1u, 256u);
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, options.trials));

  // Integer counts per worker: the merge is exact, so the schedule cannot
  // change the result.
  std::vector<Counts> partial(workers);
  auto work = [&](unsigned w) {
    const std::uint64_t begin = options.trials * w / workers;
    const std::uint64_t end = options.trials * (w + 1) / workers;
    for (std::uint64_t t = begin; t < end; ++t) {
      partial[w].add(run_trial(scenario, lambda_hat, region, options.sampling, options.seed, t,
                               options.noise));
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  Counts total;
  for (const Counts& c : partial) total.merge(c);

  const auto ci = [&](std::uint64_t k) {
    return EstimateWithCI::from_counts(k, options.trials, options.seed);
  };
  Estimate e;
  e.macro = {ci(total.macro_header), ci(total.macro_payload), ci(total.macro_total)};
  e.nearest = {ci(total.nearest_header), ci(total.nearest_payload), ci(total.nearest_total)};
  e.dominance_violations = total.violations;
  e.lambda_hat = lambda_hat;
  e.region = region;
  e.sampling = options.sampling;
  return e;
}

}  // namespace lrfhss::mc
