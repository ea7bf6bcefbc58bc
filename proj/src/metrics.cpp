#include "valvenet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "valvenet/error.hpp"
#include "valvenet/labels.hpp"

namespace valvenet {

std::optional<double> LevelIou::mean() const {
  double sum = 0;
  int n = 0;
  for (const auto& c : classes) {
    if (c.iou) {
      sum += *c.iou;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

namespace {

const LevelIou& find_level(const std::vector<LevelIou>& v, int l) {
  for (const auto& x : v)
    if (x.level == l) return x;
  throw Error("report has no level " + std::to_string(l));
}

void check_ids(const LabelMap& m, int n_classes, const char* what) {
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    if (m.data[i] >= n_classes) {
      const int x = static_cast<int>(i % m.w);
      const int y = static_cast<int>((i / m.w) % m.h);
      const int b = static_cast<int>(i / (static_cast<std::size_t>(m.w) * m.h));
      throw LabelError(std::string(what) + " pixel (" + std::to_string(b) + ", " +
                       std::to_string(y) + ", " + std::to_string(x) + ") has class " +
                       std::to_string(m.data[i]) + " >= " + std::to_string(n_classes));
    }
  }
}

}  // namespace

const LevelIou& IouReport::level(int l) const { return find_level(levels, l); }
const LevelIou& IouReport::level_in_vessel(int l) const { return find_level(in_vessel, l); }
bool IouReport::has_level(int l) const {
  return std::any_of(levels.begin(), levels.end(), [l](const auto& x) { return x.level == l; });
}

std::vector<ClassIou> iou_per_class(const LabelMap& pred, const LabelMap& gt, int n_classes,
                                    const LabelMap* mask) {
  if (!pred.same_extent(gt) || (mask && !mask->same_extent(gt))) {
    throw ShapeError("iou: label extents differ");
  }
  check_ids(pred, n_classes, "prediction");
  check_ids(gt, n_classes, "ground truth");
  std::vector<std::int64_t> inter(n_classes, 0), in_pred(n_classes, 0), in_gt(n_classes, 0);
  for (std::size_t i = 0; i < gt.data.size(); ++i) {
    if (mask && mask->data[i] == 0) continue;
    const int p = pred.data[i], g = gt.data[i];
    ++in_pred[p];
    ++in_gt[g];
    if (p == g) ++inter[p];
  }
  std::vector<ClassIou> out(n_classes);
  for (int c = 0; c < n_classes; ++c) {
    out[c].intersection = inter[c];
    out[c].union_count = in_pred[c] + in_gt[c] - inter[c];
    if (out[c].union_count > 0) {
      out[c].iou = static_cast<double>(inter[c]) / static_cast<double>(out[c].union_count);
    }
  }
  return out;
}

double pixel_accuracy(const LabelMap& pred, const LabelMap& gt) {
  if (!pred.same_extent(gt)) throw ShapeError("accuracy: label extents differ");
  if (gt.data.empty()) return 1.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < gt.data.size(); ++i) hit += pred.data[i] == gt.data[i];
  return static_cast<double>(hit) / static_cast<double>(gt.data.size());
}

IouAccumulator::IouAccumulator(std::vector<int> levels, IouMode mode) : mode_(mode) {
  for (int l : levels) {
    const int n = class_count(l);
    slots_.push_back({l, std::vector<ClassIou>(n), std::vector<ClassIou>(n),
                      std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                      std::vector<int>(n, 0), std::vector<int>(n, 0)});
  }
}

IouAccumulator::Slot& IouAccumulator::slot(int level) {
  for (auto& s : slots_)
    if (s.level == level) return s;
  throw Error("iou accumulator does not track level " + std::to_string(level));
}

void IouAccumulator::add(int level, const LabelMap& pred, const LabelMap& gt,
                         const LabelMap& vessel) {
  Slot& s = slot(level);
  const int n = class_count(level);
  auto merge = [&](const LabelMap& p, const LabelMap& g, const LabelMap* m,
                   std::vector<ClassIou>& acc, std::vector<double>& sum, std::vector<int>& cnt) {
    const auto rows = iou_per_class(p, g, n, m);
    for (int c = 0; c < n; ++c) {
      acc[c].intersection += rows[c].intersection;
      acc[c].union_count += rows[c].union_count;
      if (rows[c].iou) {
        sum[c] += *rows[c].iou;
        ++cnt[c];
      }
    }
  };
  if (mode_ == IouMode::aggregated) {
    merge(pred, gt, nullptr, s.all, s.sum_all, s.n_all);
    merge(pred, gt, &vessel, s.masked, s.sum_masked, s.n_masked);
    return;
  }
  if (!pred.same_extent(gt) || !vessel.same_extent(gt)) {
    throw ShapeError("iou: label extents differ");
  }
  const std::size_t plane = static_cast<std::size_t>(gt.h) * gt.w;
  for (int b = 0; b < gt.n; ++b) {
    auto cut = [&](const LabelMap& m) {
      LabelMap one(1, m.h, m.w);
      std::copy_n(m.data.begin() + static_cast<std::ptrdiff_t>(b * plane), plane,
                  one.data.begin());
      return one;
    };
    const LabelMap p = cut(pred), g = cut(gt), v = cut(vessel);
    merge(p, g, nullptr, s.all, s.sum_all, s.n_all);
    merge(p, g, &v, s.masked, s.sum_masked, s.n_masked);
  }
}

IouReport IouAccumulator::report() const {
  IouReport r;
  for (const auto& s : slots_) {
    LevelIou all{s.level, s.all}, masked{s.level, s.masked};
    for (std::size_t c = 0; c < s.all.size(); ++c) {
      if (mode_ == IouMode::aggregated) {
        auto ratio = [](const ClassIou& x) -> std::optional<double> {
          if (x.union_count == 0) return std::nullopt;
          return static_cast<double>(x.intersection) / static_cast<double>(x.union_count);
        };
        all.classes[c].iou = ratio(s.all[c]);
        masked.classes[c].iou = ratio(s.masked[c]);
      } else {
        all.classes[c].iou = s.n_all[c] ? std::optional(s.sum_all[c] / s.n_all[c]) : std::nullopt;
        masked.classes[c].iou =
            s.n_masked[c] ? std::optional(s.sum_masked[c] / s.n_masked[c]) : std::nullopt;
      }
    }
    r.levels.push_back(std::move(all));
    r.in_vessel.push_back(std::move(masked));
  }
  return r;
}

std::string format_percent(double iou) {
  // The epsilon keeps binary representation error (0.825 * 100 = 82.4999...)
  // from rounding exact halves down.
  const long pct = static_cast<long>(std::floor(iou * 100.0 + 0.5 + 1e-9));
  return std::to_string(pct) + "%";
}

std::string emit_comparison_table(const std::vector<std::pair<std::string, IouReport>>& columns,
                                  TableFormat format) {
  if (columns.empty()) throw Error("comparison table needs at least one report");
  std::vector<int> levels;
  for (const auto& l : columns.front().second.levels) levels.push_back(l.level);
  for (const auto& [label, report] : columns) {
    if (report.levels.size() != levels.size()) {
      throw Error("report '" + label + "' has a different set of levels");
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (report.levels[i].level != levels[i] ||
          report.levels[i].classes.size() != columns.front().second.levels[i].classes.size()) {
        throw Error("report '" + label + "' has a different class structure");
      }
    }
  }

  std::ostringstream os;
  if (format == TableFormat::csv) {
    os << "level,class,strategy,iou\n";
    for (std::size_t li = 0; li < levels.size(); ++li) {
      const int l = levels[li];
      for (int c = 0; c < class_count(l); ++c) {
        for (const auto& [label, report] : columns) {
          const auto& iou = report.levels[li].classes[c].iou;
          char buf[32] = "";
          if (iou) std::snprintf(buf, sizeof buf, "%.6f", *iou);
          os << l << ',' << class_name(l, c) << ',' << label << ',' << buf << '\n';
        }
      }
    }
    return os.str();
  }

  std::size_t name_w = 5;
  for (int l : levels)
    for (int c = 0; c < class_count(l); ++c) name_w = std::max(name_w, class_name(l, c).size() + 2);
  std::vector<std::size_t> col_w;
  for (const auto& col : columns) col_w.push_back(std::max<std::size_t>(col.first.size(), 6));

  auto pad = [&os](std::string_view s, std::size_t w, bool right) {
    if (right) os << std::string(w - std::min(w, s.size()), ' ') << s;
    else os << s << std::string(w - std::min(w, s.size()), ' ');
  };
  pad("Class", name_w, false);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    os << "  ";
    pad(columns[i].first, col_w[i], true);
  }
  os << '\n';
  for (std::size_t li = 0; li < levels.size(); ++li) {
    const int l = levels[li];
    os << level_title(l) << '\n';
    for (int c = 0; c < class_count(l); ++c) {
      pad(std::string("  ") + std::string(class_name(l, c)), name_w, false);
      for (std::size_t i = 0; i < columns.size(); ++i) {
        const auto& iou = columns[i].second.levels[li].classes[c].iou;
        os << "  ";
        pad(iou ? format_percent(*iou) : "absent", col_w[i], true);
      }
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace valvenet
