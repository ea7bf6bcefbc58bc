#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "valvenet/model.hpp"
#include "valvenet/optim.hpp"
#include "valvenet/scene.hpp"

namespace valvenet {

enum class LrSchedule { constant, cosine };

struct TrainConfig {
  int steps = 1000;
  int batch = 8;
  std::uint64_t seed = 0;
  AdamConfig adam;
  LrSchedule schedule = LrSchedule::constant;
  /// Called after every step with the summed loss; may be empty.
  std::function<void(int step, double loss)> on_step;
};

struct LossRecord {
  int step;
  int head;  // annotation level of the head
  double loss;
};

struct TrainResult {
  std::vector<LossRecord> log;
  /// Summed head loss of the first and last step.
  double initial_loss = 0;
  double final_loss = 0;
};

/// Batch of samples in the layout the model consumes. The ROI is the
/// level-1 annotation.
struct Batch {
  TensorF image;
  RoiMap<float> roi;
  std::array<LabelMap, kNumLevels> labels;
};

Batch make_batch(std::span<const LabeledSample> samples, std::span<const std::size_t> indices);

/// Mini-batch Adam over shuffled epochs. Loss is the sum over heads of the
/// per-pixel mean cross-entropy. Deterministic in (model, data, config).
TrainResult train(Model<float>& model, std::span<const LabeledSample> data,
                  const TrainConfig& config);

void write_loss_log(const std::filesystem::path& path, std::span<const LossRecord> log);

}  // namespace valvenet
