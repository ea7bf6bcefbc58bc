#include "valvenet/labels.hpp"

#include <string>

#include "valvenet/error.hpp"

namespace valvenet {

namespace {

constexpr std::array<std::string_view, kNumLevels> kTitles{
    "Vessel region", "Fill level", "Solid/Liquid", "Exact physical phase"};

constexpr std::array<std::string_view, 2> kLevel1{"Background", "Vessel"};
constexpr std::array<std::string_view, 3> kLevel2{"Background", "Empty", "Filled"};
constexpr std::array<std::string_view, 4> kLevel3{"Background", "Empty", "Liquid",
                                                  "Solid"};
constexpr std::array<std::string_view, 15> kLevel4{
    "Background", "Empty vessel", "Liquid",  "Liquid phase two", "Suspension",
    "Emulsion",   "Foam",       "Solid",   "Gel",              "Powder",
    "Granular",   "Bulk",       "Solid liquid mixture", "Solid phase two", "Vapor"};

// level 4 -> level 3: liquid-like phases to 2, solid-like phases to 3.
constexpr std::array<std::uint8_t, 15> k4to3{0, 1, 2, 2, 2, 2, 2, 3,
                                             3, 3, 3, 3, 3, 3, 3};
constexpr std::array<std::uint8_t, 4> k3to2{0, 1, 2, 2};
constexpr std::array<std::uint8_t, 3> k2to1{0, 1, 1};

void check_level(int level) {
  if (level < 1 || level > kNumLevels) {
    throw LabelError("annotation level must be 1..4, got " + std::to_string(level));
  }
}

}  // namespace

int class_count(int level) {
  check_level(level);
  return kClassCounts[level - 1];
}

std::string_view level_title(int level) {
  check_level(level);
  return kTitles[level - 1];
}

std::string_view class_name(int level, int cls) {
  if (cls < 0 || cls >= class_count(level)) {
    throw LabelError("class " + std::to_string(cls) + " undefined at level " +
                     std::to_string(level));
  }
  switch (level) {
    case 1: return kLevel1[cls];
    case 2: return kLevel2[cls];
    case 3: return kLevel3[cls];
    default: return kLevel4[cls];
  }
}

int project_class(int from_level, int cls) {
  if (cls < 0 || cls >= class_count(from_level)) {
    throw LabelError("class " + std::to_string(cls) + " undefined at level " +
                     std::to_string(from_level));
  }
  switch (from_level) {
    case 4: return k4to3[cls];
    case 3: return k3to2[cls];
    case 2: return k2to1[cls];
    default: throw LabelError("level 1 has no coarser projection");
  }
}

void validate_level(const LabelMap& plane, int level) {
  const int limit = class_count(level);
  for (std::size_t i = 0; i < plane.size(); ++i) {
    if (plane.data[i] >= limit) {
      const std::size_t per = static_cast<std::size_t>(plane.h) * plane.w;
      const std::size_t b = i / per;
      const std::size_t y = (i % per) / plane.w;
      const std::size_t x = i % plane.w;
      throw LabelError("level " + std::to_string(level) + " class id " +
                       std::to_string(plane.data[i]) + " out of range at pixel (n=" +
                       std::to_string(b) + ", y=" + std::to_string(y) + ", x=" +
                       std::to_string(x) + ")");
    }
  }
}

LabelMap project_level(const LabelMap& plane, int from_level, int to_level) {
  check_level(to_level);
  if (to_level > from_level) {
    throw LabelError("cannot project level " + std::to_string(from_level) +
                     " to finer level " + std::to_string(to_level));
  }
  validate_level(plane, from_level);
  LabelMap out = plane;
  for (int level = from_level; level > to_level; --level) {
    for (auto& v : out.data) v = static_cast<std::uint8_t>(project_class(level, v));
  }
  return out;
}

ProjectedLevels project_labels(const LabelMap& level4) {
  ProjectedLevels p;
  p.level3 = project_level(level4, 4, 3);
  p.level2 = project_level(p.level3, 3, 2);
  p.level1 = project_level(p.level2, 2, 1);
  return p;
}

LabelStack LabelStack::from_level4(LabelMap level4) {
  ProjectedLevels p = project_labels(level4);
  LabelStack s;
  s.levels[0] = std::move(p.level1);
  s.levels[1] = std::move(p.level2);
  s.levels[2] = std::move(p.level3);
  s.levels[3] = std::move(level4);
  return s;
}

}  // namespace valvenet
