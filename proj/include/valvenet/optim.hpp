#pragma once

#include <cstdint>
#include <vector>

#include "valvenet/model.hpp"

namespace valvenet {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam; one moment pair per parameter block.
struct AdamState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  explicit AdamState(AdamConfig c = {}) : config(c) {}
};

/// Applies one update to every block. `lr_scale` multiplies config.lr for
/// this step only. Throws Error naming the block on a non-finite gradient;
/// in that case no parameter is modified.
template <typename T>
void adam_step(std::vector<ParamRef<T>>& params, AdamState& state, double lr_scale = 1.0);

}  // namespace valvenet
