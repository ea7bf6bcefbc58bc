#include "valvenet/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "valvenet/error.hpp"
#include "valvenet/keyvalue.hpp"

namespace valvenet {

std::string_view to_string(LrSchedule s) {
  return s == LrSchedule::cosine ? "cosine" : "constant";
}

LrSchedule parse_schedule(std::string_view text) {
  if (text == "constant") return LrSchedule::constant;
  if (text == "cosine") return LrSchedule::cosine;
  throw ConfigError("unknown schedule '" + std::string(text) + "' (expected constant|cosine)");
}

std::string_view to_string(IouMode m) {
  return m == IouMode::per_image_mean ? "per_image" : "aggregated";
}

IouMode parse_iou_mode(std::string_view text) {
  if (text == "aggregated") return IouMode::aggregated;
  if (text == "per_image") return IouMode::per_image_mean;
  throw ConfigError("unknown iou_mode '" + std::string(text) + "' (expected aggregated|per_image)");
}

namespace {

bool parse_bool(std::string_view text, std::string_view key) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("key '" + std::string(key) + "': expected true or false, got '" +
                    std::string(text) + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ModelSpec RunConfig::model_spec() const {
  ModelSpec s;
  s.strategy = strategy;
  s.heads = heads;
  s.first_layer_filters = first_layer_filters;
  s.encoder_widths = encoder_widths;
  s.kernel_size = kernel_size;
  s.encoder_kernel_size = encoder_kernel_size;
  s.validate();
  return s;
}

TrainConfig RunConfig::train_config(std::uint64_t seed) const {
  TrainConfig t;
  t.steps = steps;
  t.batch = batch;
  t.seed = seed;
  t.adam.lr = lr;
  t.schedule = schedule;
  return t;
}

std::string RunConfig::to_text() const {
  KeyValues kv{
      {"data", data},
      {"level4_one_based", level4_one_based ? "true" : "false"},
      {"data_seed", std::to_string(data_seed)},
      {"image_size", std::to_string(image_size)},
      {"train_count", std::to_string(train_count)},
      {"test_same_count", std::to_string(test_same_count)},
      {"test_different_count", std::to_string(test_different_count)},
      {"ambiguity_count", std::to_string(ambiguity_count)},
      {"ambiguity_every", std::to_string(ambiguity_every)},
      {"strategy", std::string(to_string(strategy))},
      {"level", heads.str()},
      {"first_layer_filters", std::to_string(first_layer_filters)},
      {"encoder_widths", format_int_list(encoder_widths)},
      {"kernel_size", std::to_string(kernel_size)},
      {"encoder_kernel_size", std::to_string(encoder_kernel_size)},
      {"steps", std::to_string(steps)},
      {"batch", std::to_string(batch)},
      {"lr", format_double(lr)},
      {"schedule", std::string(to_string(schedule))},
      {"seeds", format_int_list(seeds)},
      {"vessel_steps", std::to_string(vessel_steps)},
      {"roi", std::string(to_string(roi))},
      {"iou_mode", std::string(to_string(iou_mode))},
      {"out", out},
      {"threads", std::to_string(threads)},
  };
  return format_key_values(kv);
}

RunConfig RunConfig::from_text(std::string_view text) {
  RunConfig c;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "data") c.data = value;
    else if (key == "level4_one_based") c.level4_one_based = parse_bool(value, key);
    else if (key == "data_seed") c.data_seed = static_cast<std::uint64_t>(parse_int(value, key));
    else if (key == "image_size") c.image_size = parse_int(value, key);
    else if (key == "train_count") c.train_count = parse_int(value, key);
    else if (key == "test_same_count") c.test_same_count = parse_int(value, key);
    else if (key == "test_different_count") c.test_different_count = parse_int(value, key);
    else if (key == "ambiguity_count") c.ambiguity_count = parse_int(value, key);
    else if (key == "ambiguity_every") c.ambiguity_every = parse_int(value, key);
    else if (key == "strategy") c.strategy = parse_strategy(value);
    else if (key == "level") c.heads = HeadMode::parse(value);
    else if (key == "first_layer_filters") c.first_layer_filters = parse_int(value, key);
    else if (key == "encoder_widths") c.encoder_widths = parse_int_list(value);
    else if (key == "kernel_size") c.kernel_size = parse_int(value, key);
    else if (key == "encoder_kernel_size") c.encoder_kernel_size = parse_int(value, key);
    else if (key == "steps") c.steps = parse_int(value, key);
    else if (key == "batch") c.batch = parse_int(value, key);
    else if (key == "lr") c.lr = parse_double(value, key);
    else if (key == "schedule") c.schedule = parse_schedule(value);
    else if (key == "seeds") c.seeds = parse_int_list(value);
    else if (key == "vessel_steps") c.vessel_steps = parse_int(value, key);
    else if (key == "roi") c.roi = parse_roi_source(value);
    else if (key == "iou_mode") c.iou_mode = parse_iou_mode(value);
    else if (key == "out") c.out = value;
    else if (key == "threads") c.threads = parse_int(value, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return from_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void RunConfig::write_resolved(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "config.resolved");
  if (!out) throw ConfigError("cannot write '" + (dir / "config.resolved").string() + "'");
  out << to_text();
}

void RunConfig::validate() const {
  auto positive = [](int v, const char* key) {
    if (v <= 0) throw ConfigError(std::string("key '") + key + "' must be positive");
  };
  auto non_negative = [](int v, const char* key) {
    if (v < 0) throw ConfigError(std::string("key '") + key + "' must be non-negative");
  };
  positive(image_size, "image_size");
  if (image_size % 4 != 0) throw ConfigError("image_size must be a multiple of 4");
  non_negative(train_count, "train_count");
  non_negative(test_same_count, "test_same_count");
  non_negative(test_different_count, "test_different_count");
  non_negative(ambiguity_count, "ambiguity_count");
  non_negative(ambiguity_every, "ambiguity_every");
  non_negative(steps, "steps");
  non_negative(vessel_steps, "vessel_steps");
  positive(batch, "batch");
  non_negative(threads, "threads");
  if (!(lr > 0)) throw ConfigError("lr must be positive");
  if (seeds.empty()) throw ConfigError("seeds must list at least one seed");
  model_spec();
}

}  // namespace valvenet
