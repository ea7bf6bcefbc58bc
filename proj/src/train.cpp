#include "valvenet/train.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "valvenet/error.hpp"

namespace valvenet {

Batch make_batch(std::span<const LabeledSample> samples, std::span<const std::size_t> indices) {
  std::vector<TensorF> images;
  std::array<std::vector<LabelMap>, kNumLevels> planes;
  for (std::size_t i : indices) {
    const auto& s = samples[i];
    images.push_back(s.image);
    for (int l = 0; l < kNumLevels; ++l) planes[l].push_back(s.labels.levels[l]);
  }
  std::array<LabelMap, kNumLevels> labels;
  for (int l = 0; l < kNumLevels; ++l) labels[l] = stack_labels(planes[l]);
  TensorF image = stack_batch<float>(images);
  return {std::move(image), RoiMap<float>::from_labels(labels[0]), std::move(labels)};
}

TrainResult train(Model<float>& model, std::span<const LabeledSample> data,
                  const TrainConfig& config) {
  TrainResult result;
  if (config.steps <= 0) return result;
  if (data.empty()) throw Error("train: empty training set");
  if (config.batch <= 0) throw ConfigError("train: batch must be positive");

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(data.size());
  std::size_t cursor = order.size();
  AdamState state(config.adam);
  const auto& levels = model.head_levels();

  for (int step = 0; step < config.steps; ++step) {
    std::vector<std::size_t> pick;
    while (static_cast<int>(pick.size()) < config.batch) {
      if (cursor == order.size()) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      pick.push_back(order[cursor++]);
      if (pick.size() == data.size()) break;
    }
    const Batch batch = make_batch(data, pick);

    model.zero_grad();
    const auto logits = model.spec().requires_roi() ? model.forward(batch.image, batch.roi)
                                                    : model.forward(batch.image);
    std::vector<TensorF> grads;
    double total = 0;
    for (std::size_t h = 0; h < levels.size(); ++h) {
      auto lr = softmax_cross_entropy(logits[h], batch.labels[levels[h] - 1]);
      result.log.push_back({step, levels[h], static_cast<double>(lr.loss)});
      total += lr.loss;
      grads.push_back(std::move(lr.grad));
    }
    model.backward(grads);
    auto params = model.parameters();
    double scale = 1.0;
    if (config.schedule == LrSchedule::cosine) {
      scale = 0.5 * (1.0 + std::cos(M_PI * step / config.steps));
    }
    adam_step(params, state, scale);

    if (step == 0) result.initial_loss = total;
    result.final_loss = total;
    if (config.on_step) config.on_step(step, total);
  }
  return result;
}

void write_loss_log(const std::filesystem::path& path, std::span<const LossRecord> log) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write loss log '" + path.string() + "'");
  out << "step,head,loss\n";
  char buf[64];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.9g\n", r.step, r.head, r.loss);
    out << buf;
  }
}

}  // namespace valvenet
