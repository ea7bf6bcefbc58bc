#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "valvenet/metrics.hpp"
#include "valvenet/model.hpp"
#include "valvenet/scene.hpp"

namespace valvenet {

/// Anything that maps an image (and optional ROI) to per-level label planes.
class SegmentationModel {
 public:
  virtual ~SegmentationModel() = default;
  virtual std::vector<int> head_levels() const = 0;
  virtual bool requires_roi() const = 0;
  /// One label plane per entry of head_levels(), batch extent of `image`.
  virtual std::vector<LabelMap> predict(const TensorF& image, const RoiMap<float>* roi) const = 0;
};

/// Argmax predictions of a trained network.
class NetPredictor final : public SegmentationModel {
 public:
  explicit NetPredictor(const Model<float>& model) : model_(model) {}
  std::vector<int> head_levels() const override { return model_.head_levels(); }
  bool requires_roi() const override { return model_.spec().requires_roi(); }
  std::vector<LabelMap> predict(const TensorF& image, const RoiMap<float>* roi) const override;

 private:
  const Model<float>& model_;
};

enum class RoiSource { ground_truth, predicted, none };

RoiSource parse_roi_source(std::string_view text);  // gt | pred | none
std::string_view to_string(RoiSource s);

struct EvalOptions {
  RoiSource roi = RoiSource::ground_truth;
  /// Required for RoiSource::predicted; must provide a level-1 head.
  const SegmentationModel* vessel_net = nullptr;
  IouMode mode = IouMode::aggregated;
  int batch = 16;
};

/// Per-level, per-class IOU of `model` over `test`. Throws ConfigError when
/// the ROI source does not fit the model's strategy.
IouReport evaluate(const SegmentationModel& model, std::span<const LabeledSample> test,
                   const EvalOptions& options);

/// Level-1 prediction of `vessel_net` as a binary ROI.
RoiMap<float> predict_roi(const SegmentationModel& vessel_net, const TensorF& image);

/// Two-net pipeline: the vessel net's level-1 argmax becomes the ROI of the
/// content net. Returns the content net's planes in its head order.
std::vector<LabelMap> hierarchical_segment(const SegmentationModel& vessel_net,
                                           const SegmentationModel& content_net,
                                           const TensorF& image);

}  // namespace valvenet
