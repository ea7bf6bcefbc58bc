#pragma once

// Micro fully-convolutional segmentation network with a pluggable ROI
// injection strategy in its first layer:
//
//   first   3x3 conv + relu, varying by strategy        -> C1 @ H x W
//   enc1    5x5 stride-2 conv + relu                     -> E1 @ H/2
//   enc2    5x5 stride-2 conv + relu                     -> E2 @ H/4
//   enc3    5x5 conv + relu                              -> E3 @ H/4
//   up      nearest x4, concatenated with first          -> E3 + C1 @ H x W
//   heads   one 1x1 conv per annotation level            -> logits @ H x W

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "valvenet/attention.hpp"
#include "valvenet/kernels.hpp"
#include "valvenet/labels.hpp"

namespace valvenet {

enum class Strategy { none, valve, blackout, concat };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);
inline constexpr std::array<Strategy, 4> kAllStrategies{
    Strategy::valve, Strategy::none, Strategy::blackout, Strategy::concat};

/// Either one head for a single annotation level or four heads (multi).
class HeadMode {
 public:
  static HeadMode multi() { return HeadMode(0); }
  static HeadMode single(int level);
  static HeadMode parse(std::string_view text);

  bool is_multi() const { return level_ == 0; }
  int level() const;
  std::vector<int> levels() const;
  std::string str() const;

  friend bool operator==(const HeadMode&, const HeadMode&) = default;

 private:
  explicit HeadMode(int level) : level_(level) {}
  int level_ = 0;
};

struct ModelSpec {
  Strategy strategy = Strategy::valve;
  HeadMode heads = HeadMode::multi();
  int input_channels = 3;
  int first_layer_filters = 16;
  std::vector<int> encoder_widths{24, 32, 32};
  int kernel_size = 3;  // first layer (image and valve filters)
  int encoder_kernel_size = 5;
  std::array<int, kNumLevels> class_counts = kClassCounts;

  bool requires_roi() const { return strategy != Strategy::none; }
  int head_channels(int level) const { return class_counts.at(level - 1); }
  /// Throws ConfigError describing the first invalid field.
  void validate() const;

  std::string to_text() const;
  static ModelSpec from_text(std::string_view text);

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Named view of one parameter block and its gradient accumulator.
template <typename T>
struct ParamRef {
  std::string name;
  std::span<T> value;
  std::span<T> grad;
};

template <typename T>
class Model {
 public:
  Model(ModelSpec spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  const std::vector<int>& head_levels() const { return head_levels_; }

  /// Runs the network and retains activations for backward(). Requires an
  /// ROI exactly when the strategy uses one. Returns one logit tensor per
  /// head in head_levels() order.
  std::vector<Tensor<T>> forward(const Tensor<T>& image);
  std::vector<Tensor<T>> forward(const Tensor<T>& image, const RoiMap<T>& roi);

  /// Stateless forward pass; safe to call concurrently on a shared model.
  std::vector<Tensor<T>> infer(const Tensor<T>& image, const RoiMap<T>* roi) const;

  /// Accumulates parameter gradients given d(loss)/d(logits) per head.
  void backward(std::span<const Tensor<T>> head_grads);
  void zero_grad();

  /// Parameter blocks in declared architecture order.
  std::vector<ParamRef<T>> parameters();
  std::vector<std::pair<std::string, std::span<const T>>> parameters() const;
  std::size_t parameter_count() const;

  /// Fingerprint of every relu mask from the last forward().
  std::uint64_t activation_signature() const;

  bool has_activations() const { return cache_.valid; }
  /// Valve-layer activations of the last forward(); nullptr for other strategies.
  const ValveActivations<T>* valve_activations() const;

  ValveLayerParams<T>& first_layer() { return first_; }
  const ValveLayerParams<T>& first_layer() const { return first_; }

  template <typename U>
  Model<U> cast() const;

 private:
  template <typename>
  friend class Model;

  struct Cache {
    bool valid = false;
    Tensor<T> input;  // image, or image + ROI channel for concat
    Tensor<T> roi;
    ValveActivations<T> valve;
    Tensor<T> first_pre;
    Tensor<T> first_out;  // after relu and (blackout) masking
    std::array<Tensor<T>, 3> enc_pre;
    std::array<Tensor<T>, 3> enc_out;
    Tensor<T> fused;
  };

  struct Layer {
    ConvParams<T> params;
    ConvGrads<T> grads;
  };

  std::vector<Tensor<T>> run(const Tensor<T>& image, const RoiMap<T>* roi,
                             Cache& cache) const;
  void init_grads();
  ConvParams<T> stacked_heads() const;

  ModelSpec spec_;
  std::vector<int> head_levels_;
  ValveLayerParams<T> first_;  // .valve is only used by the valve strategy
  ValveGrads<T> first_grads_;
  std::array<Layer, 3> enc_;
  std::vector<Layer> heads_;
  Cache cache_;
};

}  // namespace valvenet
