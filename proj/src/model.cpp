#include "valvenet/model.hpp"

#include <numeric>

#include "valvenet/init.hpp"
#include "valvenet/keyvalue.hpp"

namespace valvenet {

namespace {

constexpr int kUpsampleFactor = 4;
constexpr std::array<int, 3> kEncoderStrides{2, 2, 1};

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
  h ^= v;
  h *= 1099511628211ull;
}

template <typename T>
void mix_mask(std::uint64_t& h, const Tensor<T>& pre) {
  std::uint64_t word = 0;
  int bits = 0;
  for (std::size_t i = 0; i < pre.size(); ++i) {
    word = (word << 1) | (pre[i] > T(0) ? 1u : 0u);
    if (++bits == 64) {
      fnv_mix(h, word);
      word = 0;
      bits = 0;
    }
  }
  fnv_mix(h, word);
  fnv_mix(h, pre.size());
}

template <typename T>
void add_into(std::vector<T>& dst, const std::vector<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
void add_into(Tensor<T>& dst, const Tensor<T>& src) {
  T* d = dst.data();
  const T* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

template <typename T>
ConvGrads<T> zero_grads_like(const ConvParams<T>& p) {
  return {Tensor<T>(p.weights.shape()), std::vector<T>(p.bias.size(), T(0))};
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::none: return "none";
    case Strategy::valve: return "valve";
    case Strategy::blackout: return "blackout";
    case Strategy::concat: return "concat";
  }
  return "?";
}

Strategy parse_strategy(std::string_view text) {
  for (Strategy s : kAllStrategies) {
    if (to_string(s) == text) return s;
  }
  throw ConfigError("unknown strategy '" + std::string(text) +
                    "' (expected none|valve|blackout|concat)");
}

HeadMode HeadMode::single(int level) {
  if (level < 1 || level > kNumLevels) {
    throw ConfigError("head level must be 1..4, got " + std::to_string(level));
  }
  return HeadMode(level);
}

HeadMode HeadMode::parse(std::string_view text) {
  if (text == "multi") return multi();
  if (text.size() == 1 && text[0] >= '1' && text[0] <= '4') return single(text[0] - '0');
  throw ConfigError("head mode must be 1|2|3|4|multi, got '" + std::string(text) + "'");
}

int HeadMode::level() const {
  if (is_multi()) throw ConfigError("multi-head mode has no single level");
  return level_;
}

std::vector<int> HeadMode::levels() const {
  if (is_multi()) return {1, 2, 3, 4};
  return {level_};
}

std::string HeadMode::str() const {
  return is_multi() ? std::string("multi") : std::to_string(level_);
}

void ModelSpec::validate() const {
  if (input_channels <= 0) throw ConfigError("input_channels must be positive");
  if (first_layer_filters <= 0) throw ConfigError("first_layer_filters must be positive");
  if (encoder_widths.size() != 3) {
    throw ConfigError("encoder_widths needs exactly 3 entries, got " +
                      std::to_string(encoder_widths.size()));
  }
  for (int w : encoder_widths) {
    if (w <= 0) throw ConfigError("encoder widths must be positive");
  }
  if (kernel_size <= 0 || kernel_size % 2 == 0) {
    throw ConfigError("kernel_size must be a positive odd integer");
  }
  if (encoder_kernel_size <= 0 || encoder_kernel_size % 2 == 0) {
    throw ConfigError("encoder_kernel_size must be a positive odd integer");
  }
  for (int c : class_counts) {
    if (c < 2 || c > 255) throw ConfigError("class counts must lie in [2, 255]");
  }
}

std::string ModelSpec::to_text() const {
  KeyValues kv{
      {"strategy", std::string(to_string(strategy))},
      {"heads", heads.str()},
      {"input_channels", std::to_string(input_channels)},
      {"first_layer_filters", std::to_string(first_layer_filters)},
      {"encoder_widths", format_int_list(encoder_widths)},
      {"kernel_size", std::to_string(kernel_size)},
      {"encoder_kernel_size", std::to_string(encoder_kernel_size)},
      {"class_counts",
       format_int_list(std::vector<int>(class_counts.begin(), class_counts.end()))},
  };
  return format_key_values(kv);
}

ModelSpec ModelSpec::from_text(std::string_view text) {
  ModelSpec spec;
  bool seen_strategy = false, seen_heads = false;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "strategy") {
      spec.strategy = parse_strategy(value);
      seen_strategy = true;
    } else if (key == "heads") {
      spec.heads = HeadMode::parse(value);
      seen_heads = true;
    } else if (key == "input_channels") {
      spec.input_channels = parse_int(value, key);
    } else if (key == "first_layer_filters") {
      spec.first_layer_filters = parse_int(value, key);
    } else if (key == "encoder_widths") {
      spec.encoder_widths = parse_int_list(value);
    } else if (key == "kernel_size") {
      spec.kernel_size = parse_int(value, key);
    } else if (key == "encoder_kernel_size") {
      spec.encoder_kernel_size = parse_int(value, key);
    } else if (key == "class_counts") {
      const auto counts = parse_int_list(value);
      if (counts.size() != kNumLevels) {
        throw ConfigError("class_counts needs 4 entries");
      }
      std::copy(counts.begin(), counts.end(), spec.class_counts.begin());
    } else {
      throw ConfigError("unknown model spec key '" + key + "'");
    }
  }
  if (!seen_strategy || !seen_heads) {
    throw ConfigError("model spec must declare strategy and heads");
  }
  spec.validate();
  return spec;
}

template <typename T>
Model<T>::Model(ModelSpec spec, std::uint64_t seed)
    : spec_(std::move(spec)), head_levels_(spec_.heads.levels()) {
  spec_.validate();
  Rng rng(seed);
  const int k = spec_.kernel_size;
  const int c1 = spec_.first_layer_filters;
  const int in_c = spec_.input_channels + (spec_.strategy == Strategy::concat ? 1 : 0);

  // The image filters are drawn first and identically for every strategy, so
  // equal seeds give equal image filters across strategies of equal input
  // width (valve vs none in particular).
  first_.image = he_normal_conv<T>(rng, c1, in_c, k, k, 1);
  first_.valve.weights = Tensor<T>({c1, 1, k, k});
  first_.valve.bias.assign(c1, T(1));
  first_.valve.stride = 1;

  int prev = c1;
  for (int i = 0; i < 3; ++i) {
    const int width = spec_.encoder_widths[i];
    enc_[i].params = he_normal_conv<T>(rng, width, prev, spec_.encoder_kernel_size,
                                       spec_.encoder_kernel_size, kEncoderStrides[i]);
    prev = width;
  }
  const int fused = spec_.encoder_widths[2] + c1;
  for (int level : head_levels_) {
    Layer head;
    head.params = he_normal_conv<T>(rng, spec_.head_channels(level), fused, 1, 1, 1);
    heads_.push_back(std::move(head));
  }
  init_grads();
}

template <typename T>
void Model<T>::init_grads() {
  first_grads_.image = zero_grads_like(first_.image);
  first_grads_.valve = zero_grads_like(first_.valve);
  for (auto& l : enc_) l.grads = zero_grads_like(l.params);
  for (auto& l : heads_) l.grads = zero_grads_like(l.params);
}

template <typename T>
std::vector<Tensor<T>> Model<T>::forward(const Tensor<T>& image) {
  cache_.valid = false;
  auto out = run(image, nullptr, cache_);
  cache_.valid = true;
  return out;
}

template <typename T>
std::vector<Tensor<T>> Model<T>::forward(const Tensor<T>& image, const RoiMap<T>& roi) {
  cache_.valid = false;
  auto out = run(image, &roi, cache_);
  cache_.valid = true;
  return out;
}

template <typename T>
std::vector<Tensor<T>> Model<T>::infer(const Tensor<T>& image,
                                       const RoiMap<T>* roi) const {
  Cache local;
  return run(image, roi, local);
}

template <typename T>
std::vector<Tensor<T>> Model<T>::run(const Tensor<T>& image, const RoiMap<T>* roi,
                                     Cache& c) const {
  const Shape& s = image.shape();
  if (s.c != spec_.input_channels) {
    throw ShapeError("model expects " + std::to_string(spec_.input_channels) +
                     " input channels, got image " + s.str());
  }
  if (s.h % kUpsampleFactor != 0 || s.w % kUpsampleFactor != 0 || s.h == 0 || s.w == 0) {
    throw ShapeError("model input extents must be positive multiples of 4, got " +
                     s.str());
  }
  if (spec_.requires_roi() && roi == nullptr) {
    throw ConfigError(std::string("strategy '") + std::string(to_string(spec_.strategy)) +
                      "' requires an ROI map");
  }
  if (!spec_.requires_roi() && roi != nullptr) {
    throw ConfigError("strategy 'none' does not accept an ROI map");
  }
  if (roi != nullptr) {
    const Shape& r = roi->shape();
    if (r.n != s.n || r.h != s.h || r.w != s.w) {
      throw ShapeError("ROI " + r.str() + " does not match image " + s.str());
    }
    c.roi = roi->tensor();
  } else {
    c.roi = Tensor<T>();
  }

  switch (spec_.strategy) {
    case Strategy::valve:
      c.input = image;
      c.valve = valve_forward(image, *roi, first_);
      c.first_out = c.valve.output;
      break;
    case Strategy::none:
    case Strategy::blackout:
      c.input = image;
      c.first_pre = conv2d_forward(image, first_.image);
      c.first_out = relu(c.first_pre);
      if (spec_.strategy == Strategy::blackout) {
        c.first_out = blackout_apply(c.first_out, *roi);
      }
      break;
    case Strategy::concat:
      c.input = concat_roi_channel(image, *roi);
      c.first_pre = conv2d_forward(c.input, first_.image);
      c.first_out = relu(c.first_pre);
      break;
  }

  const Tensor<T>* x = &c.first_out;
  for (int i = 0; i < 3; ++i) {
    c.enc_pre[i] = conv2d_forward(*x, enc_[i].params);
    c.enc_out[i] = relu(c.enc_pre[i]);
    x = &c.enc_out[i];
  }
  const Tensor<T> up = upsample_nearest(c.enc_out[2], kUpsampleFactor);
  c.fused = concat_channels(up, c.first_out);

  // All heads read the same features: run them as one stacked 1x1 conv.
  Tensor<T> all = conv2d_forward(c.fused, stacked_heads());
  std::vector<Tensor<T>> logits;
  logits.reserve(heads_.size());
  for (std::size_t h = 0; h + 1 < heads_.size(); ++h) {
    auto [head, rest] = split_channels(all, heads_[h].params.out_channels());
    logits.push_back(std::move(head));
    all = std::move(rest);
  }
  logits.push_back(std::move(all));
  return logits;
}

template <typename T>
ConvParams<T> Model<T>::stacked_heads() const {
  if (heads_.size() == 1) return heads_.front().params;
  int k = 0;
  for (const auto& h : heads_) k += h.params.out_channels();
  const Shape w = heads_.front().params.weights.shape();
  ConvParams<T> p{Tensor<T>({k, w.c, w.h, w.w}), {}, 1};
  T* dst = p.weights.data();
  for (const auto& h : heads_) {
    dst = std::copy(h.params.weights.data(), h.params.weights.data() + h.params.weights.size(), dst);
    p.bias.insert(p.bias.end(), h.params.bias.begin(), h.params.bias.end());
  }
  return p;
}

template <typename T>
void Model<T>::backward(std::span<const Tensor<T>> head_grads) {
  if (!cache_.valid) throw Error("Model::backward called without a preceding forward");
  if (head_grads.size() != heads_.size()) {
    throw ShapeError("backward expects " + std::to_string(heads_.size()) +
                     " head gradients, got " + std::to_string(head_grads.size()));
  }
  Cache& c = cache_;
  Tensor<T> d_all = head_grads[0];
  for (std::size_t h = 1; h < heads_.size(); ++h) d_all = concat_channels(d_all, head_grads[h]);
  ConvBackward<T> hb = conv2d_backward(c.fused, stacked_heads(), d_all);
  {
    const T* gw = hb.grads.weights.data();
    const T* gb = hb.grads.bias.data();
    for (auto& head : heads_) {
      T* w = head.grads.weights.data();
      for (std::size_t i = 0; i < head.grads.weights.size(); ++i) w[i] += *gw++;
      for (auto& b : head.grads.bias) b += *gb++;
    }
  }
  Tensor<T> d_fused = std::move(hb.grad_input);
  auto [d_up, d_first] = split_channels(d_fused, spec_.encoder_widths[2]);

  Tensor<T> d = upsample_nearest_backward(d_up, kUpsampleFactor);
  for (int i = 2; i >= 0; --i) {
    const Tensor<T>& input = i == 0 ? c.first_out : c.enc_out[i - 1];
    const Tensor<T> d_pre = relu_backward(c.enc_pre[i], d);
    ConvBackward<T> b = conv2d_backward(input, enc_[i].params, d_pre);
    add_into(enc_[i].grads.weights, b.grads.weights);
    add_into(enc_[i].grads.bias, b.grads.bias);
    d = std::move(b.grad_input);
  }
  add_into(d_first, d);

  if (spec_.strategy == Strategy::valve) {
    const RoiMap<T> roi(c.roi);
    ValveGrads<T> g = valve_backward(c.valve, c.input, roi, first_, d_first, false);
    add_into(first_grads_.image.weights, g.image.weights);
    add_into(first_grads_.image.bias, g.image.bias);
    add_into(first_grads_.valve.weights, g.valve.weights);
    add_into(first_grads_.valve.bias, g.valve.bias);
    return;
  }
  if (spec_.strategy == Strategy::blackout) {
    d_first = blackout_apply(d_first, RoiMap<T>(c.roi));
  }
  const Tensor<T> d_pre = relu_backward(c.first_pre, d_first);
  ConvBackward<T> b = conv2d_backward(c.input, first_.image, d_pre, false);
  add_into(first_grads_.image.weights, b.grads.weights);
  add_into(first_grads_.image.bias, b.grads.bias);
}

template <typename T>
void Model<T>::zero_grad() {
  for (auto& p : parameters()) std::fill(p.grad.begin(), p.grad.end(), T(0));
}

template <typename T>
std::vector<ParamRef<T>> Model<T>::parameters() {
  std::vector<ParamRef<T>> out;
  auto add = [&out](const std::string& name, ConvParams<T>& p, ConvGrads<T>& g) {
    out.push_back({name + ".weight", p.weights.values(), g.weights.values()});
    out.push_back({name + ".bias", std::span<T>(p.bias), std::span<T>(g.bias)});
  };
  if (spec_.strategy == Strategy::valve) {
    add("first.image", first_.image, first_grads_.image);
    add("first.valve", first_.valve, first_grads_.valve);
  } else {
    add("first", first_.image, first_grads_.image);
  }
  for (int i = 0; i < 3; ++i) add("enc" + std::to_string(i + 1), enc_[i].params, enc_[i].grads);
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    add("head" + std::to_string(head_levels_[h]), heads_[h].params, heads_[h].grads);
  }
  return out;
}

template <typename T>
std::vector<std::pair<std::string, std::span<const T>>> Model<T>::parameters() const {
  std::vector<std::pair<std::string, std::span<const T>>> out;
  for (auto& p : const_cast<Model<T>*>(this)->parameters()) {
    out.emplace_back(p.name, std::span<const T>(p.value));
  }
  return out;
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, values] : parameters()) n += values.size();
  return n;
}

template <typename T>
std::uint64_t Model<T>::activation_signature() const {
  std::uint64_t h = 1469598103934665603ull;
  if (!cache_.valid) return h;
  mix_mask(h, spec_.strategy == Strategy::valve ? cache_.valve.normalized
                                                : cache_.first_pre);
  for (const auto& pre : cache_.enc_pre) mix_mask(h, pre);
  return h;
}

template <typename T>
const ValveActivations<T>* Model<T>::valve_activations() const {
  if (!cache_.valid || spec_.strategy != Strategy::valve) return nullptr;
  return &cache_.valve;
}

template <typename T>
template <typename U>
Model<U> Model<T>::cast() const {
  Model<U> m(spec_, 0);
  m.first_ = first_.template cast<U>();
  for (int i = 0; i < 3; ++i) m.enc_[i].params = enc_[i].params.template cast<U>();
  for (std::size_t h = 0; h < heads_.size(); ++h) {
    m.heads_[h].params = heads_[h].params.template cast<U>();
  }
  m.init_grads();
  return m;
}

template class Model<float>;
template class Model<double>;
template Model<double> Model<float>::cast<double>() const;
template Model<float> Model<double>::cast<float>() const;

}  // namespace valvenet
