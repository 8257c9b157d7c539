#pragma once

// FCC-region LR-FHSS channelization and per-packet hop sequences.
//
// Grid g, slot s owns OBW index g + grid_count * s, so the OBWs of one grid
// are interleaved across the OCW at a stride of grid_count * 488 Hz.

#include <cstdint>
#include <vector>

#include "lrfhss/model.hpp"

namespace lrfhss::hopping {

struct GridPlan {
  int grid_count = 0;
  int grid_size = 0;
  double obw_width_hz = 0.0;
  std::vector<std::vector<int>> obw_index;     // [grid][slot]
  std::vector<std::vector<double>> center_hz;  // [grid][slot], offset from the OCW base

  /// Centre spacing between consecutive slots of a grid.
  double slot_spacing_hz() const { return grid_count * obw_width_hz; }
};

GridPlan build_grid_plan(const Channelization& channels);

/// Hash behind every hop: key = (device_id << 32) | seed, advanced by the hop
/// index and salt with two odd constants, then the murmur3 64-bit finalizer:
///   x += 0x9E3779B97F4A7C15 * (index + 1) + 0xD1B54A32D192ED03 * salt
///   x ^= x >> 33; x *= 0xFF51AFD7ED558CCD;
///   x ^= x >> 33; x *= 0xC4CEB9FE1A85EC53;
///   x ^= x >> 33;
std::uint64_t hop_hash(std::uint32_t device_id, std::uint32_t seed, std::uint64_t index,
                       std::uint64_t salt);

struct HopSequence {
  std::uint32_t device_id = 0;
  std::uint32_t seed = 0;
  int grid_index = 0;
  std::vector<int> hops;  // slot within the grid, one per header replica or fragment
};

/// hop i = hop_hash(id, seed, i, 0) mod grid_size. When that repeats hop i-1,
/// the hash is re-mixed once with salt 1 and mapped onto the other slots:
/// (prev + 1 + h' mod (grid_size - 1)) mod grid_size.
HopSequence generate_sequence(std::uint32_t device_id, std::uint32_t seed, int grid_index,
                              int length, const Channelization& channels = {});

struct Collision {
  int hop = 0;
  int obw = 0;
  bool operator==(const Collision&) const = default;
};

/// Hops where both sequences sit on the same OBW. Sequences on different
/// grids never share an OBW, so the result is empty for them.
std::vector<Collision> collision_check(const HopSequence& a, const HopSequence& b,
                                       const GridPlan& plan);

}  // namespace lrfhss::hopping
