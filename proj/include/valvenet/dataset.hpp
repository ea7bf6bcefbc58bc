#pragma once

// On-disk dataset layout:
//
//   images/<stem>.png            8-bit RGB
//   labels/level1/<stem>.png     8-bit gray, pixel value = class id
//   labels/level2/<stem>.png
//   labels/level3/<stem>.png
//   labels/level4/<stem>.png     1-based exact-phase ids by default
//   manifest.csv                 optional: stem,family,ambiguity,seed

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "valvenet/scene.hpp"

namespace valvenet {

struct LoadOptions {
  /// Level-4 files store ids 1..15; subtract one on load.
  bool level4_one_based = true;
  /// Treat hierarchy violations as errors instead of reporting them.
  bool strict = false;
};

/// Pixels where a coarser plane disagrees with the projection of the finer.
struct HierarchyReport {
  std::int64_t level3_vs_level4 = 0;
  std::int64_t level2_vs_level3 = 0;
  std::int64_t level1_vs_level2 = 0;

  std::int64_t total() const { return level3_vs_level4 + level2_vs_level3 + level1_vs_level2; }
  bool consistent() const { return total() == 0; }
  std::string summary() const;
};

HierarchyReport check_hierarchy(const LabelStack& labels);

struct LoadedSample {
  LabeledSample sample;
  HierarchyReport hierarchy;
};

/// Throws FormatError for unreadable or mis-shaped rasters and LabelError for
/// unknown class ids (and, in strict mode, for hierarchy violations).
LoadedSample load_sample(const std::filesystem::path& image,
                         const std::array<std::filesystem::path, kNumLevels>& labels,
                         const LoadOptions& options = {});

/// Writes one sample into the layout under `root` with the given stem.
void save_sample(const LabeledSample& sample, const std::filesystem::path& root,
                 const std::string& stem, bool level4_one_based = true);

/// Writes every sample (stem = meta.name) plus manifest.csv.
void export_dataset(std::span<const LabeledSample> samples, const std::filesystem::path& root,
                    bool level4_one_based = true);

/// Loads every images/*.png in stem order. Family and ambiguity tags come
/// from manifest.csv when present, else family 0.
std::vector<LoadedSample> load_dataset(const std::filesystem::path& root,
                                       const LoadOptions& options = {});

struct Splits {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test_same;
  std::vector<std::size_t> test_different;
};

/// Samples from `held_out_families` form test_different; the rest are
/// shuffled with `seed` and cut into train (round(train_fraction * n)) and
/// test_same. Throws ConfigError unless both regimes are present.
Splits make_splits(std::span<const LabeledSample> samples, double train_fraction,
                   std::uint64_t seed, std::span<const int> held_out_families);

}  // namespace valvenet
