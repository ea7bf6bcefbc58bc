#include "valvenet/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "valvenet/checkpoint.hpp"
#include "valvenet/dataset.hpp"
#include "valvenet/error.hpp"

namespace valvenet {

namespace {

// Disjoint scene-seed ranges per role.
constexpr std::uint64_t kPoolOffset = 0;
constexpr std::uint64_t kHeldOutOffset = 1'000'000;
constexpr std::uint64_t kAmbiguityOffset = 2'000'000;

SceneConfig scene_for(int family, int size, bool ambiguity) {
  SceneConfig c = family_config(family);
  c.width = c.height = size;
  c.ambiguity = ambiguity;
  return c;
}

std::vector<LabeledSample> pick(std::span<const LabeledSample> all,
                                const std::vector<std::size_t>& idx) {
  std::vector<LabeledSample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

void report(const BenchmarkOptions& o, const std::string& msg) {
  if (o.progress) o.progress(msg);
}

}  // namespace

BenchmarkData make_benchmark_data(const RunConfig& config) {
  config.validate();
  const double fraction = static_cast<double>(config.train_count) /
                          (config.train_count + config.test_same_count);
  BenchmarkData d;
  std::vector<LabeledSample> pool;

  if (!config.data.empty()) {
    LoadOptions lo;
    lo.level4_one_based = config.level4_one_based;
    for (auto& s : load_dataset(config.data, lo)) pool.push_back(std::move(s.sample));
    const Splits sp = make_splits(pool, fraction, config.data_seed, kHeldOutFamilies);
    d.train = pick(pool, sp.train);
    d.test_same = pick(pool, sp.test_same);
    d.test_different = pick(pool, sp.test_different);
    const std::filesystem::path amb_dir = std::filesystem::path(config.data) / "ambiguity";
    if (std::filesystem::is_directory(amb_dir / "images")) {
      for (auto& s : load_dataset(amb_dir, lo)) d.ambiguity.push_back(std::move(s.sample));
    } else {
      for (const auto& s : d.test_same) {
        if (s.meta.ambiguity) d.ambiguity.push_back(s);
      }
    }
    return d;
  }

  const std::uint64_t base = config.data_seed << 32;
  const int same_total = config.train_count + config.test_same_count;
  for (int i = 0; i < same_total; ++i) {
    const int family = kTrainFamilies[i % kTrainFamilies.size()];
    const bool amb = config.ambiguity_every > 0 && i % config.ambiguity_every == 0;
    pool.push_back(generate_scene(base + kPoolOffset + i, scene_for(family, config.image_size, amb)));
  }
  for (int i = 0; i < config.test_different_count; ++i) {
    const int family = kHeldOutFamilies[i % kHeldOutFamilies.size()];
    const bool amb = config.ambiguity_every > 0 && i % config.ambiguity_every == 0;
    pool.push_back(
        generate_scene(base + kHeldOutOffset + i, scene_for(family, config.image_size, amb)));
  }
  const Splits sp = make_splits(pool, fraction, config.data_seed, kHeldOutFamilies);
  d.train = pick(pool, sp.train);
  d.test_same = pick(pool, sp.test_same);
  d.test_different = pick(pool, sp.test_different);
  for (int i = 0; i < config.ambiguity_count; ++i) {
    const int family = kTrainFamilies[i % kTrainFamilies.size()];
    d.ambiguity.push_back(
        generate_scene(base + kAmbiguityOffset + i, scene_for(family, config.image_size, true)));
  }
  return d;
}

double RegionStats::ratio(std::size_t filter) const {
  return inside.at(filter) / std::max(outside.at(filter), 1e-12);
}

double RegionStats::max_ratio() const {
  double best = 0;
  for (std::size_t k = 0; k < inside.size(); ++k) best = std::max(best, ratio(k));
  return best;
}

double RegionStats::max_reverse_ratio() const {
  double best = 0;
  for (std::size_t k = 0; k < inside.size(); ++k) {
    best = std::max(best, outside[k] / std::max(inside[k], 1e-12));
  }
  return best;
}

RegionStats relevance_region_stats(const Model<float>& model,
                                   std::span<const LabeledSample> samples) {
  if (model.spec().strategy != Strategy::valve) {
    throw ConfigError("relevance statistics need a valve-strategy model");
  }
  const auto& valve = model.first_layer().valve;
  const int k = valve.weights.shape().n;
  std::vector<double> sum_in(k, 0.0), sum_out(k, 0.0);
  std::int64_t n_in = 0, n_out = 0;
  for (const auto& s : samples) {
    const RoiMap<float> roi = RoiMap<float>::from_labels(s.labels.levels[0]);
    const TensorF rel = conv2d_forward(roi.tensor(), valve);
    const float* mask = roi.tensor().data();
    const std::size_t hw = rel.shape().plane();
    for (std::size_t i = 0; i < hw; ++i) (mask[i] > 0 ? n_in : n_out) += 1;
    for (int c = 0; c < k; ++c) {
      const float* r = rel.plane(0, c);
      for (std::size_t i = 0; i < hw; ++i) {
        (mask[i] > 0 ? sum_in : sum_out)[c] += std::abs(static_cast<double>(r[i]));
      }
    }
  }
  RegionStats st;
  for (int c = 0; c < k; ++c) {
    st.inside.push_back(n_in ? sum_in[c] / n_in : 0.0);
    st.outside.push_back(n_out ? sum_out[c] / n_out : 0.0);
  }
  return st;
}

const StrategyRun& SeedRun::run(Strategy s) const {
  for (const auto& r : strategies) {
    if (r.strategy == s) return r;
  }
  throw Error("no run for strategy " + std::string(to_string(s)));
}

namespace {

ModelSpec vessel_spec(const RunConfig& config) {
  RunConfig vc = config;
  vc.strategy = Strategy::none;
  vc.heads = HeadMode::single(1);
  return vc.model_spec();
}

ModelSpec strategy_spec(const RunConfig& config, Strategy st) {
  RunConfig rc = config;
  rc.strategy = st;
  rc.heads = HeadMode::multi();
  return rc.model_spec();
}

void evaluate_run(const RunConfig& config, const BenchmarkData& data, const Model<float>& model,
                  const NetPredictor& vessel_pred, StrategyRun& run, SeedRun& sr) {
  const NetPredictor pred(model);
  EvalOptions eo;
  eo.roi = model.spec().requires_roi() ? RoiSource::ground_truth : RoiSource::none;
  eo.mode = config.iou_mode;
  run.same = evaluate(pred, data.test_same, eo);
  run.different = evaluate(pred, data.test_different, eo);
  if (!data.ambiguity.empty()) run.ambiguity = evaluate(pred, data.ambiguity, eo);

  if (run.strategy == Strategy::valve) {
    EvalOptions he = eo;
    he.roi = RoiSource::predicted;
    he.vessel_net = &vessel_pred;
    sr.hierarchical_same = evaluate(pred, data.test_same, he);
    sr.valve_relevance = relevance_region_stats(model, data.test_same);
  }
}

}  // namespace

BenchmarkResult run_benchmark(const RunConfig& config, const BenchmarkData& data,
                              const BenchmarkOptions& options) {
  config.validate();
  BenchmarkResult result;
  for (int seed_value : config.seeds) {
    const auto seed = static_cast<std::uint64_t>(seed_value);
    SeedRun sr;
    sr.seed = seed;
    const std::string tag = "seed" + std::to_string(seed);

    Model<float> vessel(vessel_spec(config), seed);
    TrainConfig vtc = config.train_config(seed);
    vtc.steps = config.vessel_steps;
    report(options, tag + ": training vessel net");
    sr.vessel_training = train(vessel, data.train, vtc);
    if (options.out) {
      save_checkpoint(vessel, *options.out / tag / "vessel.ckpt");
      write_loss_log(*options.out / tag / "vessel_loss.csv", sr.vessel_training.log);
    }
    const NetPredictor vessel_pred(vessel);

    for (Strategy st : kAllStrategies) {
      Model<float> model(strategy_spec(config, st), seed);
      report(options, tag + ": training " + std::string(to_string(st)));
      StrategyRun run;
      run.strategy = st;
      run.seed = seed;
      run.training = train(model, data.train, config.train_config(seed));
      const std::string name(to_string(st));
      if (options.out) {
        save_checkpoint(model, *options.out / tag / (name + ".ckpt"));
        write_loss_log(*options.out / tag / (name + "_loss.csv"), run.training.log);
      }
      evaluate_run(config, data, model, vessel_pred, run, sr);
      sr.strategies.push_back(std::move(run));
    }
    result.seeds.push_back(std::move(sr));
  }
  return result;
}

BenchmarkResult load_benchmark(const RunConfig& config, const BenchmarkData& data,
                               const std::filesystem::path& dir) {
  config.validate();
  BenchmarkResult result;
  for (int seed_value : config.seeds) {
    const auto seed = static_cast<std::uint64_t>(seed_value);
    SeedRun sr;
    sr.seed = seed;
    const std::filesystem::path seed_dir = dir / ("seed" + std::to_string(seed));
    const Model<float> vessel = load_checkpoint(seed_dir / "vessel.ckpt", vessel_spec(config));
    const NetPredictor vessel_pred(vessel);
    for (Strategy st : kAllStrategies) {
      const std::string name(to_string(st));
      const Model<float> model = load_checkpoint(seed_dir / (name + ".ckpt"), strategy_spec(config, st));
      StrategyRun run;
      run.strategy = st;
      run.seed = seed;
      evaluate_run(config, data, model, vessel_pred, run, sr);
      sr.strategies.push_back(std::move(run));
    }
    result.seeds.push_back(std::move(sr));
  }
  return result;
}

namespace {

std::vector<LevelIou> average_levels(const std::vector<const std::vector<LevelIou>*>& all) {
  std::vector<LevelIou> out = *all.front();
  for (std::size_t l = 0; l < out.size(); ++l) {
    for (std::size_t c = 0; c < out[l].classes.size(); ++c) {
      ClassIou acc;
      double sum = 0;
      int n = 0;
      for (const auto* levels : all) {
        if (levels->size() != out.size() || (*levels)[l].level != out[l].level ||
            (*levels)[l].classes.size() != out[l].classes.size()) {
          throw Error("cannot average reports with different class structure");
        }
        const ClassIou& ci = (*levels)[l].classes[c];
        acc.intersection += ci.intersection;
        acc.union_count += ci.union_count;
        if (ci.iou) {
          sum += *ci.iou;
          ++n;
        }
      }
      if (n > 0) acc.iou = sum / n;
      out[l].classes[c] = acc;
    }
  }
  return out;
}

}  // namespace

IouReport average_reports(const std::vector<IouReport>& reports) {
  if (reports.empty()) throw Error("no reports to average");
  std::vector<const std::vector<LevelIou>*> all, masked;
  for (const auto& r : reports) {
    all.push_back(&r.levels);
    masked.push_back(&r.in_vessel);
  }
  IouReport out;
  out.levels = average_levels(all);
  out.in_vessel = average_levels(masked);
  return out;
}

std::vector<std::pair<std::string, IouReport>> comparison_columns(const BenchmarkResult& result,
                                                                  const std::string& regime) {
  if (regime != "same" && regime != "different" && regime != "ambiguity") {
    throw ConfigError("unknown regime '" + regime + "'");
  }
  std::vector<std::pair<std::string, IouReport>> cols;
  for (Strategy st : kAllStrategies) {
    std::vector<IouReport> reps;
    for (const auto& sr : result.seeds) {
      const auto& r = sr.run(st);
      reps.push_back(regime == "same" ? r.same : regime == "different" ? r.different : r.ambiguity);
    }
    std::string name(to_string(st));
    if (st != Strategy::none) name += " (gt ROI)";
    cols.emplace_back(name, average_reports(reps));
  }
  if (regime == "same") {
    std::vector<IouReport> reps;
    for (const auto& sr : result.seeds) reps.push_back(sr.hierarchical_same);
    cols.emplace_back("valve (pred ROI)", average_reports(reps));
  }
  return cols;
}

std::string benchmark_summary(const BenchmarkResult& result) {
  std::string out = "seed,strategy,fill_same,fill_different,fill_ambiguity,vessel_same\n";
  char buf[160];
  auto fill = [](const IouReport& r) {
    return r.has_level(2) && r.level(2).mean() ? *r.level(2).mean() : std::nan("");
  };
  for (const auto& sr : result.seeds) {
    for (const auto& r : sr.strategies) {
      const auto& v = r.same.level(1).classes.at(1).iou;
      std::snprintf(buf, sizeof buf, "%llu,%s,%.4f,%.4f,%.4f,%.4f\n",
                    static_cast<unsigned long long>(sr.seed),
                    std::string(to_string(r.strategy)).c_str(), fill(r.same), fill(r.different),
                    fill(r.ambiguity), v ? *v : std::nan(""));
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "%llu,valve-pred,%.4f,,,%.4f\n",
                  static_cast<unsigned long long>(sr.seed), fill(sr.hierarchical_same),
                  sr.hierarchical_same.level(1).classes.at(1).iou.value_or(std::nan("")));
    out += buf;
  }
  return out;
}

}  // namespace valvenet
