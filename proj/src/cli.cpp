#include "valvenet/cli.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <fstream>
#include <optional>

#include "valvenet/checkpoint.hpp"
#include "valvenet/comparison.hpp"
#include "valvenet/config.hpp"
#include "valvenet/dataset.hpp"
#include "valvenet/error.hpp"
#include "valvenet/viz.hpp"

namespace valvenet {

namespace fs = std::filesystem;

namespace {

// Flags shared by every subcommand; each overrides the config file.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string strategy;
  std::string level;
  std::string roi;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value configuration file");
  app->add_option("--seed", c.seed, "seed (data seed for gen-data, training seed otherwise)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--strategy", c.strategy, "none|valve|blackout|concat");
  app->add_option("--level", c.level, "1|2|3|4|multi");
  app->add_option("--roi", c.roi, "gt|pred|none");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : RunConfig::load(c.config);
  if (!c.out.empty()) cfg.out = c.out;
  if (!c.strategy.empty()) cfg.strategy = parse_strategy(c.strategy);
  if (!c.level.empty()) cfg.heads = HeadMode::parse(c.level);
  if (!c.roi.empty()) cfg.roi = parse_roi_source(c.roi);
  cfg.validate();
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << text;
}

Model<float> load_model(const std::string& path) {
  if (!fs::exists(path)) throw Error("checkpoint '" + path + "' does not exist");
  return load_checkpoint(path);
}

// Writes `<stem>.txt` and `<stem>.csv`.
void write_tables(const fs::path& dir, const std::string& stem,
                  const std::vector<std::pair<std::string, IouReport>>& cols) {
  write_text(dir / (stem + ".txt"), emit_comparison_table(cols, TableFormat::text));
  write_text(dir / (stem + ".csv"), emit_comparison_table(cols, TableFormat::csv));
}

std::string column_name(const fs::path& ckpt, RoiSource roi) {
  return ckpt.stem().string() + " (" + std::string(to_string(roi)) + ")";
}

int cmd_gen_data(const Common& c, std::ostream& out) {
  RunConfig cfg = resolve(c);
  if (c.seed) cfg.data_seed = *c.seed;
  cfg.data.clear();
  const BenchmarkData d = make_benchmark_data(cfg);
  std::vector<LabeledSample> all;
  for (const auto* part : {&d.train, &d.test_same, &d.test_different}) {
    all.insert(all.end(), part->begin(), part->end());
  }
  const fs::path root = cfg.out;
  export_dataset(all, root, cfg.level4_one_based);
  if (!d.ambiguity.empty()) export_dataset(d.ambiguity, root / "ambiguity", cfg.level4_one_based);
  cfg.write_resolved(root);
  out << "wrote " << all.size() << " scenes and " << d.ambiguity.size()
      << " ambiguity scenes to " << root.string() << "\n";
  return 0;
}

int cmd_train(const Common& c, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  const std::uint64_t seed = c.seed ? *c.seed : static_cast<std::uint64_t>(cfg.seeds.front());
  const BenchmarkData d = make_benchmark_data(cfg);
  Model<float> model(cfg.model_spec(), seed);
  const TrainResult r = train(model, d.train, cfg.train_config(seed));
  const fs::path dir = cfg.out;
  save_checkpoint(model, dir / "model.ckpt");
  write_loss_log(dir / "loss.csv", r.log);
  cfg.write_resolved(dir);
  out << "trained " << to_string(cfg.strategy) << " net (" << cfg.heads.str() << ") for "
      << cfg.steps << " steps, loss " << r.initial_loss << " -> " << r.final_loss << "\n";
  return 0;
}

int cmd_eval(const Common& c, const std::vector<std::string>& checkpoints,
             const std::string& vessel_path, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  if (checkpoints.empty()) throw ConfigError("eval needs at least one --checkpoint");
  std::vector<Model<float>> models;
  for (const auto& p : checkpoints) models.push_back(load_model(p));
  std::optional<Model<float>> vessel;
  if (!vessel_path.empty()) vessel = load_model(vessel_path);
  const BenchmarkData d = make_benchmark_data(cfg);

  const std::vector<std::pair<std::string, const std::vector<LabeledSample>*>> regimes{
      {"same", &d.test_same}, {"different", &d.test_different}, {"ambiguity", &d.ambiguity}};
  std::optional<NetPredictor> vessel_pred;
  if (vessel) vessel_pred.emplace(*vessel);
  for (const auto& [regime, set] : regimes) {
    if (set->empty()) continue;
    std::vector<std::pair<std::string, IouReport>> cols;
    for (std::size_t i = 0; i < models.size(); ++i) {
      const NetPredictor pred(models[i]);
      EvalOptions eo;
      eo.mode = cfg.iou_mode;
      eo.roi = models[i].spec().requires_roi() ? cfg.roi : RoiSource::none;
      if (eo.roi == RoiSource::predicted) {
        if (!vessel_pred) throw ConfigError("--roi pred needs --vessel <checkpoint>");
        eo.vessel_net = &*vessel_pred;
      }
      cols.emplace_back(column_name(checkpoints[i], eo.roi), evaluate(pred, *set, eo));
    }
    write_tables(cfg.out, "report_" + regime, cols);
    if (regime == "same") out << emit_comparison_table(cols, TableFormat::text);
  }
  cfg.write_resolved(cfg.out);
  return 0;
}

int cmd_compare(const Common& c, std::ostream& out) {
  RunConfig cfg = resolve(c);
  if (c.seed) cfg.seeds = {static_cast<int>(*c.seed)};
  const fs::path dir = cfg.out;
  cfg.write_resolved(dir);
  const BenchmarkData d = make_benchmark_data(cfg);
  BenchmarkOptions bo;
  bo.out = dir;
  bo.progress = [&out](const std::string& m) { out << m << "\n" << std::flush; };
  const BenchmarkResult r = run_benchmark(cfg, d, bo);

  const auto same = comparison_columns(r, "same");
  write_tables(dir, "table_same", same);
  write_tables(dir, "table_different", comparison_columns(r, "different"));
  if (!d.ambiguity.empty()) write_tables(dir, "table_ambiguity", comparison_columns(r, "ambiguity"));
  write_text(dir / "summary.csv", benchmark_summary(r));

  std::string rel = "seed,filter,inside,outside\n";
  char buf[96];
  for (const auto& sr : r.seeds) {
    for (std::size_t k = 0; k < sr.valve_relevance.inside.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%llu,%zu,%.6g,%.6g\n",
                    static_cast<unsigned long long>(sr.seed), k, sr.valve_relevance.inside[k],
                    sr.valve_relevance.outside[k]);
      rel += buf;
    }
  }
  write_text(dir / "relevance.csv", rel);
  out << emit_comparison_table(same, TableFormat::text);
  return 0;
}

int cmd_hier(const Common& c, const std::string& vessel_path, const std::string& content_path,
             const std::string& image_path, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  if (vessel_path.empty() || content_path.empty()) {
    throw ConfigError("hier needs --vessel and --content checkpoints");
  }
  const Model<float> vessel = load_model(vessel_path);
  const Model<float> content = load_model(content_path);
  const NetPredictor vp(vessel), cp(content);
  const fs::path dir = cfg.out;

  if (!image_path.empty()) {
    const TensorF image = raster_to_image(read_png(image_path));
    const auto planes = hierarchical_segment(vp, cp, image);
    const RoiMap<float> roi = predict_roi(vp, image);
    LabelMap roi_plane(1, image.shape().h, image.shape().w);
    for (std::size_t i = 0; i < roi_plane.size(); ++i) roi_plane.data[i] = roi.tensor()[i] > 0;
    write_png(dir / "roi.png", labels_to_raster(roi_plane, Palette::for_level(1)));
    for (std::size_t h = 0; h < planes.size(); ++h) {
      const int level = content.head_levels()[h];
      const std::string name = "level" + std::to_string(level);
      Raster gray(planes[h].w, planes[h].h, 1);
      gray.pixels.assign(planes[h].data.begin(), planes[h].data.end());
      write_png(dir / (name + ".png"), gray);
      write_png(dir / (name + "_overlay.png"),
                render_overlay(image, planes[h], Palette::for_level(level), 0.6));
    }
    out << "wrote " << planes.size() << " label planes to " << dir.string() << "\n";
    return 0;
  }

  const BenchmarkData d = make_benchmark_data(cfg);
  EvalOptions gt;
  gt.mode = cfg.iou_mode;
  EvalOptions pr = gt;
  pr.roi = RoiSource::predicted;
  pr.vessel_net = &vp;
  const std::vector<std::pair<std::string, IouReport>> cols{
      {column_name(content_path, RoiSource::ground_truth), evaluate(cp, d.test_same, gt)},
      {column_name(content_path, RoiSource::predicted), evaluate(cp, d.test_same, pr)}};
  write_tables(dir, "hier_same", cols);
  cfg.write_resolved(dir);
  out << emit_comparison_table(cols, TableFormat::text);
  return 0;
}

int cmd_dump_maps(const Common& c, const std::string& ckpt, const std::string& vessel_path,
                  const std::string& image_path, int index, std::ostream& out) {
  const RunConfig cfg = resolve(c);
  if (ckpt.empty()) throw ConfigError("dump-maps needs --checkpoint");
  const Model<float> model = load_model(ckpt);
  const fs::path dir = cfg.out;

  TensorF image;
  std::optional<RoiMap<float>> roi;
  if (!image_path.empty()) {
    image = raster_to_image(read_png(image_path));
  } else {
    const BenchmarkData d = make_benchmark_data(cfg);
    if (index < 0 || index >= static_cast<int>(d.test_same.size())) {
      throw ConfigError("--index " + std::to_string(index) + " is outside the test set");
    }
    image = d.test_same[index].image;
    if (cfg.roi == RoiSource::ground_truth) {
      roi = RoiMap<float>::from_labels(d.test_same[index].labels.levels[0]);
    }
  }
  if (model.spec().requires_roi() && !roi) {
    if (vessel_path.empty()) {
      throw ConfigError("this net needs an ROI: use --roi gt with a test sample, or --vessel");
    }
    const Model<float> vessel = load_model(vessel_path);
    roi = predict_roi(NetPredictor(vessel), image);
  }
  if (!model.spec().requires_roi()) roi.reset();

  constexpr int kZoom = 4;
  write_png(dir / "image.png", magnify(image_to_raster(image), kZoom));
  const auto& first = model.first_layer();
  auto write_maps = [&](const std::string& name, const TensorF& t) {
    for (int k = 0; k < t.shape().c; ++k) {
      write_png(dir / name / ("filter" + std::to_string(k) + ".png"),
                magnify(render_signed_map(t, 0, k), kZoom));
    }
  };
  if (model.spec().strategy == Strategy::valve) {
    const auto acts = valve_forward(image, *roi, first);
    write_maps("feature", acts.feature);
    write_maps("relevance", acts.relevance);
    write_maps("normalized", acts.normalized);
  } else {
    const TensorF in =
        model.spec().strategy == Strategy::concat ? concat_roi_channel(image, *roi) : image;
    write_maps("feature", conv2d_forward(in, first.image));
  }
  const auto planes = NetPredictor(model).predict(image, roi ? &*roi : nullptr);
  for (std::size_t h = 0; h < planes.size(); ++h) {
    const int level = model.head_levels()[h];
    write_png(dir / ("overlay_level" + std::to_string(level) + ".png"),
              magnify(render_overlay(image, planes[h], Palette::for_level(level), 0.6), kZoom));
  }
  out << "wrote maps of " << first.image.weights.shape().n << " filters to " << dir.string()
      << "\n";
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"valve-filter segmentation experiments", "valvenet"};
  app.require_subcommand(1);
  Common common;
  std::vector<std::string> checkpoints;
  std::string checkpoint, vessel, content, image;
  int index = 0;

  auto* gen = app.add_subcommand("gen-data", "synthesize scenes and export the dataset layout");
  auto* tr = app.add_subcommand("train", "train one net; writes model.ckpt and loss.csv");
  auto* ev = app.add_subcommand("eval", "IOU reports of checkpoints on the test sets");
  auto* cmp = app.add_subcommand("compare", "train and evaluate all strategies over the seeds");
  auto* hier = app.add_subcommand("hier", "vessel net + content net pipeline");
  auto* dump = app.add_subcommand("dump-maps", "first-layer signed maps and overlays");
  for (auto* sub : {gen, tr, ev, cmp, hier, dump}) add_common(sub, common);
  ev->add_option("--checkpoint", checkpoints, "checkpoint to evaluate (repeatable)");
  ev->add_option("--vessel", vessel, "vessel-net checkpoint for --roi pred");
  hier->add_option("--vessel", vessel, "level-1 vessel net without ROI");
  hier->add_option("--content", content, "ROI-strategy content net");
  hier->add_option("--image", image, "segment this RGB image instead of the test set");
  dump->add_option("--checkpoint", checkpoint, "trained net");
  dump->add_option("--vessel", vessel, "vessel net supplying the ROI");
  dump->add_option("--image", image, "RGB image instead of a test sample");
  dump->add_option("--index", index, "test-set sample index");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*gen) return cmd_gen_data(common, out);
    if (*tr) return cmd_train(common, out);
    if (*ev) return cmd_eval(common, checkpoints, vessel, out);
    if (*cmp) return cmd_compare(common, out);
    if (*hier) return cmd_hier(common, vessel, content, image, out);
    if (*dump) return cmd_dump_maps(common, checkpoint, vessel, image, index, out);
  } catch (const std::exception& e) {
    err << "valvenet: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace valvenet
