#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "valvenet/evaluate.hpp"
#include "valvenet/model.hpp"
#include "valvenet/train.hpp"

namespace valvenet {

/// Every setting of a run, as `key = value` text. Unknown keys are rejected.
struct RunConfig {
  // data: an on-disk dataset, or synthetic scenes when `data` is empty
  std::string data;
  bool level4_one_based = true;
  std::uint64_t data_seed = 0;
  int image_size = 64;
  int train_count = 200;
  int test_same_count = 50;
  int test_different_count = 50;
  int ambiguity_count = 50;
  /// Every n-th training / same-regime scene gets an ambiguity band (0: none).
  int ambiguity_every = 2;

  // model
  Strategy strategy = Strategy::valve;
  HeadMode heads = HeadMode::multi();
  int first_layer_filters = 16;
  std::vector<int> encoder_widths{24, 32, 32};
  int kernel_size = 3;
  int encoder_kernel_size = 5;

  // training
  int steps = 1500;
  int batch = 8;
  double lr = 1e-3;
  LrSchedule schedule = LrSchedule::constant;
  std::vector<int> seeds{0, 1, 2};
  /// Steps of the vessel net used for predicted ROIs.
  int vessel_steps = 1000;

  // evaluation
  RoiSource roi = RoiSource::ground_truth;
  IouMode iou_mode = IouMode::aggregated;

  std::string out = "runs";
  /// OpenMP threads for the kernels; 0 keeps the runtime default.
  int threads = 0;

  ModelSpec model_spec() const;
  TrainConfig train_config(std::uint64_t seed) const;

  std::string to_text() const;
  static RunConfig from_text(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);
  /// Writes `<dir>/config.resolved`.
  void write_resolved(const std::filesystem::path& dir) const;
  /// Throws ConfigError for out-of-range values.
  void validate() const;
};

std::string_view to_string(LrSchedule s);
LrSchedule parse_schedule(std::string_view text);
std::string_view to_string(IouMode m);
IouMode parse_iou_mode(std::string_view text);

}  // namespace valvenet
