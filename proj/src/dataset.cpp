#include "valvenet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "valvenet/error.hpp"
#include "valvenet/png_io.hpp"

namespace valvenet {

namespace fs = std::filesystem;

namespace {

std::int64_t count_diff(const LabelMap& a, const LabelMap& b) {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) n += a.data[i] != b.data[i];
  return n;
}

LabelMap read_label_plane(const fs::path& path, int level, const LabelMap* like,
                          bool one_based) {
  const Raster r = read_png(path);
  if (r.channels != 1) {
    throw FormatError("label file '" + path.string() + "' must be single-channel");
  }
  if (like && (r.width != like->w || r.height != like->h)) {
    throw FormatError("label file '" + path.string() + "' is " + std::to_string(r.width) +
                      "x" + std::to_string(r.height) + ", image is " +
                      std::to_string(like->w) + "x" + std::to_string(like->h));
  }
  LabelMap m(1, r.height, r.width);
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    int v = r.pixels[i];
    if (level == 4 && one_based) {
      if (v == 0) {
        throw LabelError("'" + path.string() + "' pixel (" + std::to_string(i / r.width) +
                         ", " + std::to_string(i % r.width) +
                         ") has value 0, not a valid 1-based phase id");
      }
      --v;
    }
    m.data[i] = static_cast<std::uint8_t>(v);
  }
  try {
    validate_level(m, level);
  } catch (const LabelError& e) {
    throw LabelError("'" + path.string() + "': " + e.what());
  }
  return m;
}

fs::path label_path(const fs::path& root, int level, const std::string& stem) {
  return root / "labels" / ("level" + std::to_string(level)) / (stem + ".png");
}

}  // namespace

std::string HierarchyReport::summary() const {
  std::ostringstream os;
  os << "hierarchy violations: level3/level4 " << level3_vs_level4 << ", level2/level3 "
     << level2_vs_level3 << ", level1/level2 " << level1_vs_level2;
  return os.str();
}

HierarchyReport check_hierarchy(const LabelStack& s) {
  HierarchyReport r;
  r.level3_vs_level4 = count_diff(project_level(s.level(4), 4, 3), s.level(3));
  r.level2_vs_level3 = count_diff(project_level(s.level(3), 3, 2), s.level(2));
  r.level1_vs_level2 = count_diff(project_level(s.level(2), 2, 1), s.level(1));
  return r;
}

LoadedSample load_sample(const fs::path& image,
                         const std::array<fs::path, kNumLevels>& labels,
                         const LoadOptions& options) {
  const Raster r = read_png(image);
  if (r.channels != 3) throw FormatError("image '" + image.string() + "' must be RGB");
  LoadedSample out;
  auto& s = out.sample;
  s.image = TensorF({1, 3, r.height, r.width});
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x)
      for (int c = 0; c < 3; ++c) s.image(0, c, y, x) = r.at(x, y, c) / 255.0f;

  const LabelMap extent(1, r.height, r.width);
  for (int l = 1; l <= kNumLevels; ++l) {
    s.labels.level(l) = read_label_plane(labels[l - 1], l, &extent, options.level4_one_based);
  }
  out.hierarchy = check_hierarchy(s.labels);
  if (options.strict && !out.hierarchy.consistent()) {
    throw LabelError("'" + image.string() + "': " + out.hierarchy.summary());
  }
  s.meta.name = image.stem().string();
  return out;
}

void save_sample(const LabeledSample& sample, const fs::path& root, const std::string& stem,
                 bool level4_one_based) {
  const auto& img = sample.image;
  const int h = img.shape().h, w = img.shape().w;
  if (img.shape().n != 1 || img.shape().c != 3) {
    throw ShapeError("save_sample: expected a [1, 3, h, w] image, got " + img.shape().str());
  }
  Raster rgb(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(img(0, c, y, x), 0.0f, 1.0f);
        rgb.at(x, y, c) = static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
  write_png(root / "images" / (stem + ".png"), rgb);
  for (int l = 1; l <= kNumLevels; ++l) {
    const LabelMap& m = sample.labels.level(l);
    Raster gray(m.w, m.h, 1);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
      gray.pixels[i] = static_cast<std::uint8_t>(m.data[i] + (l == 4 && level4_one_based));
    }
    write_png(label_path(root, l, stem), gray);
  }
}

void export_dataset(std::span<const LabeledSample> samples, const fs::path& root,
                    bool level4_one_based) {
  fs::create_directories(root);
  std::ofstream manifest(root / "manifest.csv");
  if (!manifest) throw FormatError("cannot write '" + (root / "manifest.csv").string() + "'");
  manifest << "stem,family,ambiguity,seed\n";
  for (const auto& s : samples) {
    if (s.meta.name.empty()) throw FormatError("export_dataset: sample without a name");
    save_sample(s, root, s.meta.name, level4_one_based);
    manifest << s.meta.name << ',' << s.meta.family << ',' << (s.meta.ambiguity ? 1 : 0) << ','
             << s.meta.seed << '\n';
  }
}

std::vector<LoadedSample> load_dataset(const fs::path& root, const LoadOptions& options) {
  const fs::path images = root / "images";
  if (!fs::is_directory(images)) {
    throw FormatError("dataset '" + root.string() + "' has no images/ directory");
  }
  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(images)) {
    if (e.is_regular_file() && e.path().extension() == ".png") stems.push_back(e.path().stem());
  }
  std::sort(stems.begin(), stems.end());

  struct Tag {
    int family = 0;
    bool ambiguity = false;
    std::uint64_t seed = 0;
  };
  std::map<std::string, Tag> tags;
  if (std::ifstream in(root / "manifest.csv"); in) {
    std::string line;
    std::getline(in, line);  // header
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string stem, fam, amb, seed;
      if (!std::getline(ls, stem, ',') || !std::getline(ls, fam, ',') ||
          !std::getline(ls, amb, ',')) {
        throw FormatError("manifest.csv line " + std::to_string(lineno) + ": expected stem,family,ambiguity[,seed]");
      }
      std::getline(ls, seed, ',');
      try {
        tags[stem] = {std::stoi(fam), amb == "1", seed.empty() ? 0 : std::stoull(seed)};
      } catch (const std::exception&) {
        throw FormatError("manifest.csv line " + std::to_string(lineno) + ": bad number");
      }
    }
  }

  std::vector<LoadedSample> out;
  out.reserve(stems.size());
  for (const auto& stem : stems) {
    std::array<fs::path, kNumLevels> labels;
    for (int l = 1; l <= kNumLevels; ++l) labels[l - 1] = label_path(root, l, stem);
    out.push_back(load_sample(images / (stem + ".png"), labels, options));
    if (auto it = tags.find(stem); it != tags.end()) {
      auto& meta = out.back().sample.meta;
      meta.family = it->second.family;
      meta.ambiguity = it->second.ambiguity;
      meta.seed = it->second.seed;
    }
  }
  return out;
}

Splits make_splits(std::span<const LabeledSample> samples, double train_fraction,
                   std::uint64_t seed, std::span<const int> held_out_families) {
  if (!(train_fraction > 0 && train_fraction < 1)) {
    throw ConfigError("train fraction must lie strictly between 0 and 1");
  }
  auto held_out = [&](int fam) {
    return std::find(held_out_families.begin(), held_out_families.end(), fam) !=
           held_out_families.end();
  };
  std::vector<int> families;
  Splits s;
  std::vector<std::size_t> same;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const int fam = samples[i].meta.family;
    if (std::find(families.begin(), families.end(), fam) == families.end()) families.push_back(fam);
    (held_out(fam) ? s.test_different : same).push_back(i);
  }
  if (families.size() < 2) {
    throw ConfigError("make_splits: need at least 2 source families, found " +
                      std::to_string(families.size()));
  }
  if (s.test_different.empty() || same.empty()) {
    throw ConfigError("make_splits: both training and held-out families must be present");
  }
  std::mt19937_64 rng(seed);
  std::shuffle(same.begin(), same.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * same.size()));
  s.train.assign(same.begin(), same.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test_same.assign(same.begin() + static_cast<std::ptrdiff_t>(n_train), same.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test_same.begin(), s.test_same.end());
  return s;
}

}  // namespace valvenet
