#pragma once

// Four-level annotation schema for vessel scenes.
//
//   level 1  vessel region   0 background, 1 vessel
//   level 2  fill level      0 background, 1 empty, 2 filled
//   level 3  solid/liquid    0 background, 1 empty, 2 liquid, 3 solid
//   level 4  exact phase     15 classes, internal ids 0..14 (see Phase)
//
// Coarser levels are always derived from level 4 through fixed projections.

#include <array>
#include <cstdint>
#include <string_view>

#include "valvenet/tensor.hpp"

namespace valvenet {

inline constexpr int kNumLevels = 4;
inline constexpr std::array<int, kNumLevels> kClassCounts{2, 3, 4, 15};

enum class Phase : std::uint8_t {
  background = 0,
  empty_vessel = 1,
  liquid = 2,
  liquid_phase_two = 3,
  suspension = 4,
  emulsion = 5,
  foam = 6,
  solid = 7,
  gel = 8,
  powder = 9,
  granular = 10,
  bulk = 11,
  solid_liquid_mixture = 12,
  solid_phase_two = 13,
  vapor = 14,
};

int class_count(int level);
std::string_view level_title(int level);
std::string_view class_name(int level, int cls);

/// Maps one class id of `from_level` to the next coarser level.
int project_class(int from_level, int cls);

/// Projects a whole plane from `from_level` down to `to_level` (to < from).
/// Throws LabelError naming the pixel for ids outside the level's range.
LabelMap project_level(const LabelMap& plane, int from_level, int to_level);

struct LabelStack {
  std::array<LabelMap, kNumLevels> levels;

  const LabelMap& level(int l) const { return levels.at(l - 1); }
  LabelMap& level(int l) { return levels.at(l - 1); }

  static LabelStack from_level4(LabelMap level4);
  friend bool operator==(const LabelStack&, const LabelStack&) = default;
};

struct ProjectedLevels {
  LabelMap level3;
  LabelMap level2;
  LabelMap level1;
};

ProjectedLevels project_labels(const LabelMap& level4);

/// Throws LabelError naming the first pixel whose id is >= class_count(level).
void validate_level(const LabelMap& plane, int level);

}  // namespace valvenet
