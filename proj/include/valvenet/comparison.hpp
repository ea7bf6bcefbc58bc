#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "valvenet/config.hpp"
#include "valvenet/evaluate.hpp"
#include "valvenet/scene.hpp"
#include "valvenet/train.hpp"

namespace valvenet {

struct BenchmarkData {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test_same;
  std::vector<LabeledSample> test_different;
  /// Same-regime scenes that all carry an ambiguity band.
  std::vector<LabeledSample> ambiguity;
};

/// Synthetic scenes when `config.data` is empty, else the dataset on disk
/// split by family (held-out families form test_different).
BenchmarkData make_benchmark_data(const RunConfig& config);

/// Per-filter mean |relevance| inside and outside the ROI over a sample set.
struct RegionStats {
  std::vector<double> inside;
  std::vector<double> outside;

  double ratio(std::size_t filter) const;  // inside / outside
  double max_ratio() const;
  /// Largest outside / inside.
  double max_reverse_ratio() const;
};

/// Throws ConfigError unless `model` uses the valve strategy.
RegionStats relevance_region_stats(const Model<float>& model,
                                   std::span<const LabeledSample> samples);

struct StrategyRun {
  Strategy strategy = Strategy::valve;
  std::uint64_t seed = 0;
  TrainResult training;
  IouReport same, different, ambiguity;
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<StrategyRun> strategies;  // kAllStrategies order
  TrainResult vessel_training;
  /// Valve net fed the vessel net's prediction instead of the true ROI.
  IouReport hierarchical_same;
  RegionStats valve_relevance;

  const StrategyRun& run(Strategy s) const;
};

struct BenchmarkResult {
  std::vector<SeedRun> seeds;
};

struct BenchmarkOptions {
  /// Checkpoints and loss logs go here when set.
  std::optional<std::filesystem::path> out;
  std::function<void(const std::string&)> progress;
};

/// Trains every strategy (multi-head) and a level-1 vessel net per seed with
/// identical budgets, then evaluates all test regimes.
BenchmarkResult run_benchmark(const RunConfig& config, const BenchmarkData& data,
                              const BenchmarkOptions& options = {});

/// Evaluates the checkpoints a previous run_benchmark wrote to `dir` (same
/// config and data) without training. Training logs are left empty.
BenchmarkResult load_benchmark(const RunConfig& config, const BenchmarkData& data,
                               const std::filesystem::path& dir);

/// Class-wise mean of defined IOUs across reports of equal structure; counts
/// are summed.
IouReport average_reports(const std::vector<IouReport>& reports);

/// Seed-averaged comparison columns for one regime: "same", "different" or
/// "ambiguity". The "same" table also carries the predicted-ROI valve column.
std::vector<std::pair<std::string, IouReport>> comparison_columns(const BenchmarkResult& result,
                                                                  const std::string& regime);

/// Per-seed mean fill-level IOU, one line per seed and strategy.
std::string benchmark_summary(const BenchmarkResult& result);

}  // namespace valvenet
