#include "valvenet/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "valvenet/error.hpp"

namespace valvenet {

namespace {

using Rng = std::mt19937_64;

struct Rgb {
  double r = 0, g = 0, b = 0;
};

Rgb mix(const Rgb& a, const Rgb& b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

Rgb scale(const Rgb& a, double s) { return {a.r * s, a.g * s, a.b * s}; }

Rgb offset(const Rgb& a, double d) { return {a.r + d, a.g + d, a.b + d}; }

Rgb hsv(double hue_deg, double s, double v) {
  hue_deg = std::fmod(std::fmod(hue_deg, 360.0) + 360.0, 360.0);
  const double c = v * s;
  const double hp = hue_deg / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  Rgb o;
  switch (static_cast<int>(hp)) {
    case 0: o = {c, x, 0}; break;
    case 1: o = {x, c, 0}; break;
    case 2: o = {0, c, x}; break;
    case 3: o = {0, x, c}; break;
    case 4: o = {x, 0, c}; break;
    default: o = {c, 0, x}; break;
  }
  return offset(o, v - c);
}

// Appearance scheme of one source family.
struct Style {
  Rgb bg_lo, bg_hi;
  Rgb distract_lo, distract_hi;
  double hue_lo, hue_hi;  // material hues in degrees
  Rgb tint;
};

const std::array<Style, kNumFamilies> kStyles{{
    // 0: pale lab bench, blue/cyan contents
    {{0.55, 0.55, 0.55}, {0.85, 0.85, 0.85}, {0.2, 0.2, 0.2}, {0.9, 0.9, 0.9}, 180, 250,
     {0.86, 0.92, 0.96}},
    // 1: blue backdrop, red/orange contents
    {{0.25, 0.35, 0.55}, {0.45, 0.55, 0.8}, {0.1, 0.2, 0.4}, {0.6, 0.7, 0.9}, 0, 45,
     {0.88, 0.9, 0.95}},
    // 2: wooden bench, green contents
    {{0.55, 0.4, 0.25}, {0.8, 0.6, 0.45}, {0.3, 0.2, 0.1}, {0.9, 0.75, 0.55}, 95, 150,
     {0.9, 0.92, 0.9}},
    // 3: dark fume hood, purple/magenta contents
    {{0.05, 0.05, 0.08}, {0.25, 0.25, 0.3}, {0.0, 0.0, 0.0}, {0.4, 0.4, 0.45}, 265, 330,
     {0.8, 0.85, 0.9}},
    // 4 (held out): green-grey backdrop, olive contents, green glass
    {{0.3, 0.5, 0.35}, {0.5, 0.7, 0.5}, {0.1, 0.3, 0.1}, {0.6, 0.85, 0.6}, 70, 110,
     {0.6, 0.85, 0.55}},
    // 5 (held out): warm orange backdrop, orange/brown contents, amber glass
    {{0.7, 0.35, 0.15}, {0.9, 0.55, 0.3}, {0.5, 0.2, 0.05}, {1.0, 0.7, 0.4}, 15, 40,
     {0.95, 0.7, 0.35}},
}};

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Rgb uniform_rgb(Rng& rng, const Rgb& lo, const Rgb& hi) {
  return {uniform(rng, lo.r, hi.r), uniform(rng, lo.g, hi.g), uniform(rng, lo.b, hi.b)};
}

struct Vessel {
  VesselShape shape = VesselShape::beaker;
  double cx = 0;
  int top = 0;
  int bottom = 0;
  double half_width = 0;
  double neck_half = 0;
  int neck_end = 0;

  int height() const { return bottom - top + 1; }

  double half_width_at(int y) const {
    if (y < top || y > bottom) return -1.0;
    switch (shape) {
      case VesselShape::beaker:
        return y <= top + 1 ? half_width + 1.0 : half_width;
      case VesselShape::flask: {
        if (y <= neck_end) return y <= top + 1 ? neck_half + 1.0 : neck_half;
        const double t = static_cast<double>(y - neck_end) / std::max(1, bottom - neck_end);
        return neck_half + (half_width - neck_half) * t;
      }
      case VesselShape::vial: {
        const double round_from = bottom - half_width;
        if (y + 0.5 <= round_from) return half_width;
        const double dy = y + 0.5 - round_from;
        const double r2 = half_width * half_width - dy * dy;
        return r2 > 0 ? std::sqrt(r2) : 0.0;
      }
    }
    return -1.0;
  }

  bool contains(int x, int y) const {
    const double hw = half_width_at(y);
    return hw > 0 && std::abs(x + 0.5 - cx) <= hw;
  }
};

std::vector<std::uint8_t> rasterize(const Vessel& v, int w, int h) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) mask[static_cast<std::size_t>(y) * w + x] = v.contains(x, y);
  return mask;
}

Vessel sample_vessel(Rng& rng, const SceneConfig& cfg) {
  std::discrete_distribution<int> pick(cfg.shape_weights.begin(), cfg.shape_weights.end());
  const int w = cfg.width, h = cfg.height;
  for (int attempt = 0; attempt < 200; ++attempt) {
    Vessel v;
    v.shape = static_cast<VesselShape>(pick(rng));
    const double vh = uniform(rng, 0.40, 0.85) * h;
    double width = 0;
    switch (v.shape) {
      case VesselShape::beaker: width = uniform(rng, 0.45, 0.80) * vh; break;
      case VesselShape::flask: width = uniform(rng, 0.55, 0.90) * vh; break;
      case VesselShape::vial: width = uniform(rng, 0.22, 0.38) * vh; break;
    }
    v.half_width = std::max(2.0, width / 2.0);
    v.neck_half = std::max(1.5, v.half_width / 3.0);
    const int vh_px = std::max(6, static_cast<int>(std::lround(vh)));
    const double margin = v.half_width + 3.0;
    if (2 * margin >= w || vh_px + 4 >= h) continue;
    v.cx = uniform(rng, margin, w - margin);
    v.bottom = uniform_int(rng, vh_px + 1, h - 3);
    v.top = v.bottom - vh_px + 1;
    v.neck_end = v.top + static_cast<int>(0.35 * vh_px);
    const auto mask = rasterize(v, w, h);
    const double frac = static_cast<double>(std::count(mask.begin(), mask.end(), 1)) /
                        static_cast<double>(mask.size());
    if (frac >= cfg.min_area_fraction && frac <= cfg.max_area_fraction) return v;
  }
  throw Error("scene generator: no vessel within area bounds [" +
              std::to_string(cfg.min_area_fraction) + ", " +
              std::to_string(cfg.max_area_fraction) + "] after 200 attempts");
}

bool is_liquid_like(Phase p) {
  switch (p) {
    case Phase::liquid:
    case Phase::liquid_phase_two:
    case Phase::suspension:
    case Phase::emulsion:
    case Phase::gel:
    case Phase::solid_liquid_mixture:
      return true;
    default:
      return false;
  }
}

struct Layer {
  Phase phase;
  int top, bottom;
  Rgb color;
  double opacity;
};

// Material color and opacity of one content layer.
Layer make_layer(Rng& rng, const Style& st, Phase phase, int top, int bottom) {
  Layer l{phase, top, bottom, {}, 0.0};
  const double hue = uniform(rng, st.hue_lo, st.hue_hi);
  switch (phase) {
    case Phase::foam:
      l.color = {0.92, 0.92, 0.9};
      l.opacity = 0.85;
      break;
    case Phase::powder:
      l.color = hsv(hue, uniform(rng, 0.05, 0.3), uniform(rng, 0.75, 0.95));
      l.opacity = 0.92;
      break;
    case Phase::granular:
      l.color = hsv(hue, uniform(rng, 0.3, 0.6), uniform(rng, 0.45, 0.75));
      l.opacity = 0.95;
      break;
    case Phase::vapor:
      l.color = {0.95, 0.95, 0.95};
      l.opacity = uniform(rng, 0.2, 0.35);
      break;
    case Phase::solid:
    case Phase::bulk:
    case Phase::solid_phase_two:
      l.color = hsv(hue, uniform(rng, 0.3, 0.7), uniform(rng, 0.2, 0.5));
      l.opacity = 1.0;
      break;
    case Phase::suspension:
      l.color = mix(hsv(hue, uniform(rng, 0.5, 0.9), uniform(rng, 0.4, 0.85)),
                    {1, 1, 1}, 0.35);
      l.opacity = 0.85;
      break;
    case Phase::gel:
      l.color = hsv(hue, uniform(rng, 0.4, 0.8), uniform(rng, 0.5, 0.9));
      l.opacity = 0.5;
      break;
    default:
      l.color = hsv(hue, uniform(rng, 0.5, 0.95), uniform(rng, 0.35, 0.85));
      l.opacity = uniform(rng, 0.55, 0.85);
      break;
  }
  return l;
}

Rgb shade(Rng& rng, const Layer& l, int x, int y, const Rgb& under) {
  Rgb c = l.color;
  const double depth = static_cast<double>(y - l.top) / std::max(1, l.bottom - l.top);
  switch (l.phase) {
    case Phase::foam:
      c = offset(c, uniform(rng, 0, 1) < 0.3 ? 0.06 : -0.06);
      break;
    case Phase::powder:
      c = offset(c, uniform(rng, -0.06, 0.06));
      break;
    case Phase::granular:
    case Phase::bulk: {
      // Coarse blocks: texture depends on position only.
      const int block = l.phase == Phase::granular ? 2 : 4;
      const std::uint64_t key = static_cast<std::uint64_t>((x / block) * 7919 + (y / block) * 104729);
      c = offset(c, (static_cast<double>((key * 2654435761u) % 1000) / 1000.0 - 0.5) * 0.3);
      break;
    }
    case Phase::emulsion:
      c = offset(c, 0.08 * std::sin(x * 1.3) * std::cos(y * 1.7));
      break;
    case Phase::solid_liquid_mixture:
      if (uniform(rng, 0, 1) < 0.15) c = scale(c, 0.4);
      break;
    default:
      c = scale(c, 1.0 - 0.15 * depth);
      break;
  }
  Rgb out = mix(under, c, l.opacity);
  if (y == l.top && is_liquid_like(l.phase)) out = scale(out, 0.75);
  return out;
}

constexpr int kRimWidth = 2;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

void SceneConfig::validate() const {
  if (width < 16 || height < 16) throw ConfigError("scene extents must be at least 16");
  if (!(min_area_fraction > 0 && min_area_fraction < max_area_fraction &&
        max_area_fraction < 1)) {
    throw ConfigError("vessel area bounds need 0 < min < max < 1");
  }
  if (max_content_layers < 0 || max_content_layers > 2) {
    throw ConfigError("max_content_layers must be 0..2");
  }
  if (family < 0 || family >= kNumFamilies) {
    throw ConfigError("scene family must be 0.." + std::to_string(kNumFamilies - 1));
  }
  if (noise < 0) throw ConfigError("noise must be non-negative");
  if (distractors < 0) throw ConfigError("distractors must be non-negative");
  double total = 0;
  for (double wgt : shape_weights) {
    if (wgt < 0) throw ConfigError("shape weights must be non-negative");
    total += wgt;
  }
  if (total <= 0) throw ConfigError("at least one shape weight must be positive");
  if (max_content_layers > 0 && palette.empty()) {
    throw ConfigError("phase palette is empty");
  }
  for (Phase p : palette) {
    if (p == Phase::background || p == Phase::empty_vessel) {
      throw ConfigError("palette may only contain material phases");
    }
  }
}

std::string SceneConfig::digest() const {
  std::ostringstream os;
  os << width << 'x' << height << ';' << shape_weights[0] << ',' << shape_weights[1]
     << ',' << shape_weights[2] << ';' << max_content_layers << ';';
  for (Phase p : palette) os << static_cast<int>(p) << ',';
  os << ';' << distractors << ';' << ambiguity << ';' << noise << ';'
     << min_area_fraction << ';' << max_area_fraction << ';' << family;
  std::uint64_t h = 1469598103934665603ull;
  for (char ch : os.str()) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SceneConfig family_config(int family) {
  SceneConfig cfg;
  cfg.family = family;
  switch (family) {
    case 0: cfg.shape_weights = {2.0, 1.0, 0.5}; break;
    case 1: cfg.shape_weights = {1.0, 2.0, 0.5}; break;
    case 2: cfg.shape_weights = {1.5, 1.5, 0.5}; break;
    case 3: cfg.shape_weights = {1.0, 1.0, 1.0}; cfg.distractors = 4; break;
    case 4:
      cfg.shape_weights = {0.5, 0.5, 2.0};
      cfg.noise = 0.05;
      cfg.distractors = 6;
      break;
    case 5:
      cfg.shape_weights = {0.5, 2.0, 1.0};
      cfg.noise = 0.05;
      cfg.distractors = 6;
      break;
    default:
      throw ConfigError("unknown scene family " + std::to_string(family));
  }
  return cfg;
}

LabeledSample generate_scene(std::uint64_t seed, const SceneConfig& cfg) {
  cfg.validate();
  Rng rng(seed);
  const Style& st = kStyles[cfg.family];
  const int w = cfg.width, h = cfg.height;
  std::vector<Rgb> px(static_cast<std::size_t>(w) * h);
  auto at = [&](int x, int y) -> Rgb& { return px[static_cast<std::size_t>(y) * w + x]; };

  // Background: vertical gradient plus distractors.
  const Rgb top_color = uniform_rgb(rng, st.bg_lo, st.bg_hi);
  const Rgb bottom_color = scale(top_color, uniform(rng, 0.8, 1.1));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) at(x, y) = mix(top_color, bottom_color, double(y) / (h - 1));

  const Vessel vessel = sample_vessel(rng, cfg);

  for (int i = 0; i < cfg.distractors; ++i) {
    const Rgb color = uniform_rgb(rng, st.distract_lo, st.distract_hi);
    const int kind = uniform_int(rng, 0, 2);
    int x0, y0, x1, y1;
    if (kind == 0) {  // rectangle
      x0 = uniform_int(rng, 0, w - 4);
      y0 = uniform_int(rng, 0, h - 4);
      x1 = std::min(w - 1, x0 + uniform_int(rng, 3, 18));
      y1 = std::min(h - 1, y0 + uniform_int(rng, 3, 18));
    } else if (kind == 1) {  // vertical stripe
      x0 = uniform_int(rng, 0, w - 3);
      x1 = std::min(w - 1, x0 + uniform_int(rng, 1, 3));
      y0 = 0;
      y1 = h - 1;
    } else {  // thin horizontal line
      y0 = uniform_int(rng, 0, h - 2);
      y1 = y0 + uniform_int(rng, 0, 1);
      x0 = uniform_int(rng, 0, w / 2);
      x1 = std::min(w - 1, x0 + uniform_int(rng, w / 4, w));
    }
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) at(x, y) = mix(at(x, y), color, 0.85);
  }

  int band_top = -1;
  if (cfg.ambiguity) {
    const int vh = vessel.height();
    const int lo = vessel.top + static_cast<int>(0.3 * vh);
    const int hi = std::max(lo, vessel.bottom - static_cast<int>(0.12 * vh));
    band_top = uniform_int(rng, lo, hi);
    Layer band = make_layer(rng, st, Phase::liquid, band_top, h - 1);
    for (int y = band_top; y < h; ++y)
      for (int x = 0; x < w; ++x) at(x, y) = shade(rng, band, x, y, at(x, y));
  }

  // Level-4 annotation: vessel pixels start as empty vessel.
  LabelMap level4(1, h, w, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (vessel.contains(x, y)) level4.at(0, y, x) = static_cast<std::uint8_t>(Phase::empty_vessel);

  // Contents, stacked bottom-up; the vapor layer, if any, goes on top.
  int n_layers = 0;
  if (cfg.max_content_layers > 0) {
    n_layers = uniform(rng, 0, 1) < 0.15 ? 0 : uniform_int(rng, 1, cfg.max_content_layers);
  }
  if (n_layers > 0) {
    const int interior_top = vessel.top + 2;
    const int interior_rows = vessel.bottom - interior_top + 1;
    const double fill = uniform(rng, 0.2, 0.85);
    const int fill_rows = std::max(2 * n_layers, static_cast<int>(std::lround(fill * interior_rows)));
    std::vector<double> share(n_layers);
    for (auto& s : share) s = uniform(rng, 0.3, 1.0);
    const double total = std::accumulate(share.begin(), share.end(), 0.0);

    std::vector<Phase> solids_and_liquids;
    bool has_vapor = false;
    for (Phase p : cfg.palette) {
      if (p == Phase::vapor) has_vapor = true;
      else solids_and_liquids.push_back(p);
    }
    int y_bottom = vessel.bottom;
    int remaining = fill_rows;
    for (int i = 0; i < n_layers; ++i) {
      const bool last = i == n_layers - 1;
      const int rows = last ? remaining
                            : std::max(2, static_cast<int>(std::lround(fill_rows * share[i] / total)));
      remaining = std::max(2, remaining - rows);
      const int y_top = std::max(interior_top, y_bottom - rows + 1);
      Phase phase;
      const bool vapor_ok = has_vapor && last && n_layers > 1;
      if (solids_and_liquids.empty() || (vapor_ok && uniform(rng, 0, 1) < 0.35)) {
        phase = Phase::vapor;
      } else {
        phase = solids_and_liquids[uniform_int(rng, 0, static_cast<int>(solids_and_liquids.size()) - 1)];
        if (phase == Phase::foam && i == 0 && n_layers > 1) phase = Phase::liquid;
      }
      const Layer layer = make_layer(rng, st, phase, y_top, y_bottom);
      for (int y = y_top; y <= y_bottom; ++y)
        for (int x = 0; x < w; ++x)
          if (vessel.contains(x, y)) {
            at(x, y) = shade(rng, layer, x, y, at(x, y));
            level4.at(0, y, x) = static_cast<std::uint8_t>(phase);
          }
      y_bottom = y_top - 1;
      if (y_bottom < interior_top) break;
    }
  }

  // Glass: tinted alpha blend, darker walls, one specular streak.
  const double alpha = uniform(rng, 0.3, 0.7);
  const Rgb tint = scale(st.tint, uniform(rng, 0.95, 1.05));
  const Rgb wall = scale(tint, 0.55);
  const double streak_pos = uniform(rng, 0.35, 0.65);
  for (int y = 0; y < h; ++y) {
    const double hw = vessel.half_width_at(y);
    const int streak_x = static_cast<int>(std::floor(vessel.cx - hw * streak_pos));
    for (int x = 0; x < w; ++x) {
      if (!vessel.contains(x, y)) continue;
      Rgb c = mix(at(x, y), tint, alpha);
      const bool edge = !vessel.contains(x - 1, y) || !vessel.contains(x + 1, y) ||
                        !vessel.contains(x, y - 1) || !vessel.contains(x, y + 1);
      if (edge) c = mix(c, wall, 0.6);
      else if (x == streak_x && y > vessel.top + 2) c = mix(c, {1, 1, 1}, 0.45);
      at(x, y) = c;
    }
  }
  // Refraction shadow hugging the glass outside its sides and bottom. It also
  // keeps the few background pixels next to the walls from carrying context.
  const Rgb shadow = scale(tint, 0.25);
  for (int y = std::max(0, vessel.top); y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (vessel.contains(x, y)) continue;
      bool near = false;
      for (int dy = -kRimWidth; dy <= kRimWidth && !near; ++dy)
        for (int dx = -kRimWidth; dx <= kRimWidth && !near; ++dx) near = vessel.contains(x + dx, y + dy);
      if (near) at(x, y) = mix(at(x, y), shadow, 0.85);
    }

  LabeledSample s;
  s.image = TensorF({1, 3, h, w});
  std::normal_distribution<double> noise(0.0, cfg.noise > 0 ? cfg.noise : 1.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const Rgb c = at(x, y);
      const double n0 = cfg.noise > 0 ? noise(rng) : 0.0;
      const double n1 = cfg.noise > 0 ? noise(rng) : 0.0;
      const double n2 = cfg.noise > 0 ? noise(rng) : 0.0;
      s.image(0, 0, y, x) = static_cast<float>(clamp01(c.r + n0));
      s.image(0, 1, y, x) = static_cast<float>(clamp01(c.g + n1));
      s.image(0, 2, y, x) = static_cast<float>(clamp01(c.b + n2));
    }
  s.labels = LabelStack::from_level4(std::move(level4));
  s.meta.seed = seed;
  s.meta.family = cfg.family;
  s.meta.ambiguity = cfg.ambiguity;
  s.meta.band_top = band_top;
  s.meta.config_digest = cfg.digest();
  char name[64];
  std::snprintf(name, sizeof name, "f%d_s%llu%s", cfg.family,
                static_cast<unsigned long long>(seed), cfg.ambiguity ? "_amb" : "");
  s.meta.name = name;
  return s;
}

}  // namespace valvenet
