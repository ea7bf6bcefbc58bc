#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "valvenet/cli.hpp"
#include "valvenet/config.hpp"
#include "valvenet/error.hpp"
#include "valvenet/viz.hpp"

using namespace valvenet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path tiny_config(const fs::path& dir) {
  RunConfig c;
  c.image_size = 32;
  c.train_count = 8;
  c.test_same_count = 4;
  c.test_different_count = 4;
  c.ambiguity_count = 2;
  c.first_layer_filters = 4;
  c.encoder_widths = {6, 6, 6};
  c.steps = 3;
  c.vessel_steps = 3;
  c.batch = 4;
  c.seeds = {0};
  const fs::path p = dir / "tiny.cfg";
  std::ofstream(p) << c.to_text();
  return p;
}

}  // namespace

TEST(SignedMap, WorkedExample) {
  const double m = 2.5;
  const std::vector<double> plane{m, -m, 0.0, m / 2};
  const Raster r = render_signed_map(plane, 2, 2);
  ASSERT_EQ(r.channels, 3);
  EXPECT_EQ(r.at(0, 0, 1), 255);
  EXPECT_EQ(r.at(0, 0, 0), 0);
  EXPECT_EQ(r.at(1, 0, 0), 255);
  EXPECT_EQ(r.at(1, 0, 1), 0);
  for (int c = 0; c < 3; ++c) EXPECT_EQ(r.at(0, 1, c), 0);
  EXPECT_EQ(r.at(1, 1, 1), 128);
}

TEST(SignedMap, ScaleInvariantAndZeroIsBlack) {
  std::vector<double> a{0.1, -0.4, 0.25, 0.0, 0.9, -0.3};
  std::vector<double> b = a;
  for (double& v : b) v *= 17.0;
  EXPECT_EQ(render_signed_map(a, 3, 2), render_signed_map(b, 3, 2));
  const Raster z = render_signed_map(std::vector<double>(6, 0.0), 3, 2);
  for (auto p : z.pixels) EXPECT_EQ(p, 0);
}

TEST(Overlay, AlphaEndpoints) {
  const auto image = fixtures::random_tensor<float>({1, 3, 4, 4}, 3, 0.5);
  TensorF img = image;
  for (auto& v : img.values()) v = std::abs(v);
  LabelMap labels(1, 4, 4, 2);
  labels.data[0] = 0;
  const Palette pal = Palette::for_level(2);
  EXPECT_EQ(render_overlay(img, labels, pal, 0.0), image_to_raster(img));
  const Raster full = render_overlay(img, labels, pal, 1.0);
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(full.at(1, 0, c), pal.colors[2][c]);
    EXPECT_EQ(full.at(0, 0, c), image_to_raster(img).at(0, 0, c));
  }
  labels.data[1] = 7;
  EXPECT_THROW(render_overlay(img, labels, pal, 0.5), Error);
}

TEST(Png, RoundTrip) {
  TempDir dir("valvenet_png");
  Raster rgb(5, 3, 3);
  for (std::size_t i = 0; i < rgb.pixels.size(); ++i) rgb.pixels[i] = static_cast<std::uint8_t>(i * 13);
  write_png(dir.path / "a.png", rgb);
  EXPECT_EQ(read_png(dir.path / "a.png"), rgb);
  Raster gray(4, 4, 1, 9);
  write_png(dir.path / "g.png", gray);
  EXPECT_EQ(read_png(dir.path / "g.png"), gray);
  write_png(dir.path / "b.png", rgb);
  EXPECT_EQ(slurp(dir.path / "a.png"), slurp(dir.path / "b.png"));
  EXPECT_EQ(image_to_raster(raster_to_image(rgb)), rgb);
  std::ofstream(dir.path / "junk.png") << "not a png";
  EXPECT_THROW(read_png(dir.path / "junk.png"), FormatError);
}

TEST(Config, TextRoundTripAndUnknownKey) {
  RunConfig c;
  c.lr = 3e-3;
  c.seeds = {4, 5};
  c.schedule = LrSchedule::cosine;
  const RunConfig back = RunConfig::from_text(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  try {
    RunConfig::from_text("steps = 10\nlearning_rate = 0.1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("learning_rate"), std::string::npos);
  }
  EXPECT_THROW(RunConfig::from_text("steps = ten\n"), ConfigError);
}

TEST(Cli, FailuresAreOneLineAndNonzero) {
  TempDir dir("valvenet_cli_err");
  const CliRun missing = cli({"eval", "--checkpoint", (dir.path / "nope.ckpt").string(), "--out",
                           dir.path.string()});
  EXPECT_NE(missing.code, 0);
  EXPECT_EQ(missing.err.rfind("valvenet: ", 0), 0u) << missing.err;
  EXPECT_EQ(std::count(missing.err.begin(), missing.err.end(), '\n'), 1);

  const CliRun bad_cfg = cli({"train", "--config", (dir.path / "none.cfg").string()});
  EXPECT_NE(bad_cfg.code, 0);
  EXPECT_EQ(bad_cfg.err.rfind("valvenet: ", 0), 0u);

  std::ofstream(dir.path / "bad.cfg") << "stepz = 3\n";
  const CliRun unknown = cli({"train", "--config", (dir.path / "bad.cfg").string()});
  EXPECT_NE(unknown.code, 0);
  EXPECT_NE(unknown.err.find("stepz"), std::string::npos);

  EXPECT_NE(cli({"train", "--strategy", "spotlight"}).code, 0);
  EXPECT_NE(cli({"frobnicate"}).code, 0);
  EXPECT_NE(cli({}).code, 0);
}

TEST(Cli, GenDataAndTrainAreByteReproducible) {
  TempDir dir("valvenet_cli_repro");
  const fs::path cfg = tiny_config(dir.path);
  for (const char* run : {"a", "b"}) {
    const fs::path out = dir.path / run;
    ASSERT_EQ(cli({"gen-data", "--config", cfg.string(), "--seed", "7", "--out",
                   (out / "data").string()}).code, 0);
    const CliRun t = cli({"train", "--config", cfg.string(), "--seed", "1", "--out",
                       (out / "model").string()});
    ASSERT_EQ(t.code, 0) << t.err;
  }
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir.path / "a")) {
    // config.resolved records the --out path itself.
    if (!e.is_regular_file() || e.path().filename() == "config.resolved") continue;
    const fs::path rel = fs::relative(e.path(), dir.path / "a");
    EXPECT_EQ(slurp(e.path()), slurp(dir.path / "b" / rel)) << rel;
    ++files;
  }
  EXPECT_GT(files, 8u * 5u);
  EXPECT_TRUE(fs::exists(dir.path / "a/data/labels/level4"));
  EXPECT_TRUE(fs::exists(dir.path / "a/model/model.ckpt"));
  EXPECT_EQ(slurp(dir.path / "a/model/loss.csv").rfind("step,head,loss\n", 0), 0u);

  // A different training seed changes the checkpoint.
  ASSERT_EQ(cli({"train", "--config", cfg.string(), "--seed", "2", "--out",
                 (dir.path / "c").string()}).code, 0);
  EXPECT_NE(slurp(dir.path / "a/model/model.ckpt"), slurp(dir.path / "c/model.ckpt"));
}

TEST(Cli, CompareEvalHierAndDumpMaps) {
  TempDir dir("valvenet_cli_flow");
  const fs::path cfg = tiny_config(dir.path);
  const std::string d = dir.path.string();

  const CliRun cmp = cli({"compare", "--config", cfg.string(), "--out", d + "/cmp"});
  ASSERT_EQ(cmp.code, 0) << cmp.err;
  for (const char* f : {"table_same.txt", "table_different.csv", "table_ambiguity.txt",
                        "summary.csv", "relevance.csv"}) {
    EXPECT_TRUE(fs::exists(dir.path / "cmp" / f)) << f;
  }
  for (const char* group : {"Vessel region", "Fill level", "Solid/Liquid", "Exact physical phase"})
    EXPECT_NE(cmp.out.find(group), std::string::npos);
  EXPECT_NE(cmp.out.find("valve (pred ROI)"), std::string::npos);
  EXPECT_EQ(slurp(dir.path / "cmp/table_same.csv").rfind("level,class,strategy,iou\n", 0), 0u);

  ASSERT_EQ(cli({"train", "--config", cfg.string(), "--out", d + "/valve"}).code, 0);
  ASSERT_EQ(cli({"train", "--config", cfg.string(), "--strategy", "none", "--level", "1", "--out",
                 d + "/vessel"}).code, 0);

  const CliRun ev = cli({"eval", "--config", cfg.string(), "--checkpoint", d + "/valve/model.ckpt",
                      "--roi", "gt", "--out", d + "/eval"});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_TRUE(fs::exists(dir.path / "eval/report_same.csv"));

  const CliRun pred = cli({"eval", "--config", cfg.string(), "--checkpoint", d + "/valve/model.ckpt",
                        "--roi", "pred", "--out", d + "/eval_pred"});
  EXPECT_NE(pred.code, 0);  // needs --vessel

  const CliRun hier = cli({"hier", "--config", cfg.string(), "--vessel", d + "/vessel/model.ckpt",
                        "--content", d + "/valve/model.ckpt", "--out", d + "/hier"});
  ASSERT_EQ(hier.code, 0) << hier.err;

  ASSERT_EQ(cli({"gen-data", "--config", cfg.string(), "--out", d + "/data"}).code, 0);
  fs::path image;
  for (const auto& e : fs::directory_iterator(dir.path / "data/images")) {
    image = e.path();
    break;
  }
  const CliRun maps = cli({"dump-maps", "--config", cfg.string(), "--checkpoint",
                        d + "/valve/model.ckpt", "--index", "1", "--out", d + "/maps"});
  ASSERT_EQ(maps.code, 0) << maps.err;
  EXPECT_NE(cli({"dump-maps", "--config", cfg.string(), "--checkpoint", d + "/valve/model.ckpt",
                 "--image", image.string(), "--out", d + "/maps_img"}).code, 0);
  const CliRun from_png = cli({"dump-maps", "--config", cfg.string(), "--checkpoint",
                            d + "/valve/model.ckpt", "--vessel", d + "/vessel/model.ckpt",
                            "--image", image.string(), "--out", d + "/maps_img"});
  ASSERT_EQ(from_png.code, 0) << from_png.err;
  EXPECT_TRUE(fs::exists(dir.path / "maps_img/relevance/filter0.png"));
  for (const char* sub : {"feature", "relevance", "normalized"}) {
    EXPECT_TRUE(fs::exists(dir.path / "maps" / sub / "filter0.png")) << sub;
    EXPECT_TRUE(fs::exists(dir.path / "maps" / sub / "filter3.png")) << sub;
  }
  const Raster r = read_png(dir.path / "maps/relevance/filter0.png");
  EXPECT_EQ(r.width, 32 * 4);
}
