#include "valvenet/evaluate.hpp"

#include <algorithm>
#include <numeric>

#include "valvenet/error.hpp"
#include "valvenet/train.hpp"

namespace valvenet {

std::vector<LabelMap> NetPredictor::predict(const TensorF& image,
                                            const RoiMap<float>* roi) const {
  const auto logits = model_.infer(image, roi);
  std::vector<LabelMap> out;
  out.reserve(logits.size());
  for (const auto& l : logits) out.push_back(argmax_channels(l));
  return out;
}

RoiSource parse_roi_source(std::string_view text) {
  if (text == "gt") return RoiSource::ground_truth;
  if (text == "pred") return RoiSource::predicted;
  if (text == "none") return RoiSource::none;
  throw ConfigError("unknown ROI source '" + std::string(text) + "' (expected gt|pred|none)");
}

std::string_view to_string(RoiSource s) {
  switch (s) {
    case RoiSource::ground_truth: return "gt";
    case RoiSource::predicted: return "pred";
    case RoiSource::none: return "none";
  }
  return "?";
}

RoiMap<float> predict_roi(const SegmentationModel& vessel_net, const TensorF& image) {
  const auto levels = vessel_net.head_levels();
  const auto it = std::find(levels.begin(), levels.end(), 1);
  if (it == levels.end()) throw ConfigError("vessel net has no level-1 head");
  if (vessel_net.requires_roi()) throw ConfigError("vessel net must not require an ROI");
  const auto planes = vessel_net.predict(image, nullptr);
  return RoiMap<float>::from_labels(planes[static_cast<std::size_t>(it - levels.begin())]);
}

std::vector<LabelMap> hierarchical_segment(const SegmentationModel& vessel_net,
                                           const SegmentationModel& content_net,
                                           const TensorF& image) {
  const RoiMap<float> roi = predict_roi(vessel_net, image);
  return content_net.predict(image, &roi);
}

IouReport evaluate(const SegmentationModel& model, std::span<const LabeledSample> test,
                   const EvalOptions& options) {
  if (options.roi == RoiSource::none && model.requires_roi()) {
    throw ConfigError("this strategy needs an ROI; ROI source 'none' is not allowed");
  }
  if (options.roi != RoiSource::none && !model.requires_roi()) {
    throw ConfigError("this model takes no ROI; use ROI source 'none'");
  }
  if (options.roi == RoiSource::predicted && options.vessel_net == nullptr) {
    throw ConfigError("ROI source 'pred' needs a vessel net");
  }
  if (options.batch <= 0) throw ConfigError("evaluation batch must be positive");

  const auto levels = model.head_levels();
  IouAccumulator acc(levels, options.mode);
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < test.size(); start += options.batch) {
    idx.resize(std::min<std::size_t>(options.batch, test.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    const Batch b = make_batch(test, idx);
    std::vector<LabelMap> planes;
    switch (options.roi) {
      case RoiSource::ground_truth: planes = model.predict(b.image, &b.roi); break;
      case RoiSource::predicted:
        planes = hierarchical_segment(*options.vessel_net, model, b.image);
        break;
      case RoiSource::none: planes = model.predict(b.image, nullptr); break;
    }
    for (std::size_t h = 0; h < levels.size(); ++h) {
      acc.add(levels[h], planes[h], b.labels[levels[h] - 1], b.labels[0]);
    }
  }
  return acc.report();
}

}  // namespace valvenet
