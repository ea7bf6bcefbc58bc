#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "valvenet/labels.hpp"
#include "valvenet/tensor.hpp"

namespace valvenet {

enum class VesselShape { beaker, flask, vial };

/// Parameters of the procedural vessel-scene generator.
struct SceneConfig {
  int width = 64;
  int height = 64;
  /// Relative sampling weights of beaker, flask and vial silhouettes.
  std::array<double, 3> shape_weights{1.0, 1.0, 1.0};
  int max_content_layers = 2;
  std::vector<Phase> palette{Phase::liquid, Phase::liquid_phase_two, Phase::foam,
                             Phase::powder, Phase::granular, Phase::vapor};
  /// Number of background distractor shapes (rectangles, stripes, lines).
  int distractors = 3;
  /// Draw a horizontal background band from inside the vessel's height down
  /// past its bottom; through the glass it looks exactly like a fill line.
  bool ambiguity = false;
  double noise = 0.02;
  double min_area_fraction = 0.05;
  double max_area_fraction = 0.40;
  /// Source-family id; selects the background and material color scheme.
  int family = 0;

  /// Throws ConfigError for inconsistent settings.
  void validate() const;
  /// Stable hex digest of every field.
  std::string digest() const;
};

inline constexpr int kNumFamilies = 6;
/// Families 0..3 form the training regime; 4 and 5 are held out.
inline constexpr std::array<int, 4> kTrainFamilies{0, 1, 2, 3};
inline constexpr std::array<int, 2> kHeldOutFamilies{4, 5};

/// Preset configuration of one source family.
SceneConfig family_config(int family);

struct SampleMeta {
  std::uint64_t seed = 0;
  int family = 0;
  bool ambiguity = false;
  int band_top = -1;  // first row of the ambiguity band, -1 if none
  std::string config_digest;
  std::string name;
};

struct LabeledSample {
  TensorF image;  // [1, 3, h, w], values in [0, 1]
  LabelStack labels;
  SampleMeta meta;
};

/// Deterministic in (seed, config). Only level 4 is painted; levels 3..1 are
/// projections of it. Throws Error if no vessel satisfying the area bounds
/// is found within a bounded number of attempts.
LabeledSample generate_scene(std::uint64_t seed, const SceneConfig& config);

}  // namespace valvenet
