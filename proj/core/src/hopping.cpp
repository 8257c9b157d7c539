#include "lrfhss/hopping.hpp"

#include <algorithm>

#include "lrfhss/errors.hpp"

namespace lrfhss::hopping {

GridPlan build_grid_plan(const Channelization& channels) {
  channels.validate();
  GridPlan plan;
  plan.grid_count = channels.grid_count;
  plan.grid_size = channels.grid_size;
  plan.obw_width_hz = channels.obw_width_hz;
  plan.obw_index.assign(channels.grid_count, std::vector<int>(channels.grid_size));
  plan.center_hz.assign(channels.grid_count, std::vector<double>(channels.grid_size));
  for (int g = 0; g < channels.grid_count; ++g) {
    for (int s = 0; s < channels.grid_size; ++s) {
      const int obw = g + channels.grid_count * s;
      plan.obw_index[g][s] = obw;
      plan.center_hz[g][s] = obw * channels.obw_width_hz + 0.5 * channels.obw_width_hz;
    }
  }
  return plan;
}

std::uint64_t hop_hash(std::uint32_t device_id, std::uint32_t seed, std::uint64_t index,
                       std::uint64_t salt) {
  std::uint64_t x = (static_cast<std::uint64_t>(device_id) << 32) | seed;
  x += 0x9E3779B97F4A7C15ULL * (index + 1) + 0xD1B54A32D192ED03ULL * salt;
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDULL;
  x ^= x >> 33;
  x *= 0xC4CEB9FE1A85EC53ULL;
  x ^= x >> 33;
  return x;
}

HopSequence generate_sequence(std::uint32_t device_id, std::uint32_t seed, int grid_index,
                              int length, const Channelization& channels) {
  channels.validate();
  if (grid_index < 0 || grid_index >= channels.grid_count)
    throw DomainError("grid index out of range");
  if (length < 1) throw DomainError("sequence length must be >= 1");
  if (channels.grid_size < 2 && length > 1)
    throw DomainError("a single-slot grid cannot avoid repeated hops");

  const auto slots = static_cast<std::uint64_t>(channels.grid_size);
  HopSequence seq{device_id, seed, grid_index, {}};
  seq.hops.reserve(length);
  for (int i = 0; i < length; ++i) {
    int hop = static_cast<int>(hop_hash(device_id, seed, i, 0) % slots);
    if (i > 0 && hop == seq.hops.back()) {
      const auto other = hop_hash(device_id, seed, i, 1) % (slots - 1);
      hop = static_cast<int>((seq.hops.back() + 1 + other) % slots);
    }
    seq.hops.push_back(hop);
  }
  return seq;
}

std::vector<Collision> collision_check(const HopSequence& a, const HopSequence& b,
                                       const GridPlan& plan) {
  std::vector<Collision> out;
  if (a.grid_index != b.grid_index) return out;
  const std::size_t n = std::min(a.hops.size(), b.hops.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a.hops[i] == b.hops[i]) {
      out.push_back({static_cast<int>(i), plan.obw_index.at(a.grid_index).at(a.hops[i])});
    }
  }
  return out;
}

}  // namespace lrfhss::hopping
