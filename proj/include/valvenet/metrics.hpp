#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "valvenet/tensor.hpp"

namespace valvenet {

struct ClassIou {
  std::int64_t intersection = 0;
  std::int64_t union_count = 0;
  /// Absent when the class never occurs in either prediction or truth.
  std::optional<double> iou;
};

struct LevelIou {
  int level = 0;
  std::vector<ClassIou> classes;

  /// Mean over classes with a defined IOU; absent if there are none.
  std::optional<double> mean() const;
};

struct IouReport {
  std::vector<LevelIou> levels;
  /// Same counts with every pixel outside the ground-truth vessel ignored.
  std::vector<LevelIou> in_vessel;

  const LevelIou& level(int l) const;
  const LevelIou& level_in_vessel(int l) const;
  bool has_level(int l) const;
};

/// Per-class counts over all pixels of `pred` vs `gt` (any batch size).
/// When `mask` is given, pixels where it is 0 are excluded from every count.
std::vector<ClassIou> iou_per_class(const LabelMap& pred, const LabelMap& gt, int n_classes,
                                    const LabelMap* mask = nullptr);

double pixel_accuracy(const LabelMap& pred, const LabelMap& gt);

enum class IouMode {
  aggregated,     // global intersection and union counts
  per_image_mean  // IOU per image, averaged over images where defined
};

/// Accumulates IOU over a test set, one image (or batch) at a time. Counts
/// are merged in call order.
class IouAccumulator {
 public:
  IouAccumulator(std::vector<int> levels, IouMode mode = IouMode::aggregated);

  void add(int level, const LabelMap& pred, const LabelMap& gt, const LabelMap& vessel);
  IouReport report() const;

 private:
  struct Slot {
    int level;
    std::vector<ClassIou> all, masked;
    std::vector<double> sum_all, sum_masked;
    std::vector<int> n_all, n_masked;
  };
  Slot& slot(int level);

  IouMode mode_;
  std::vector<Slot> slots_;
};

enum class TableFormat { text, csv };

/// Integer percentage rounded half-up, e.g. 0.825 -> "83%".
std::string format_percent(double iou);

/// Comparison table with one row per class grouped by annotation level and
/// one column per labelled report. CSV columns: level,class,strategy,iou.
std::string emit_comparison_table(const std::vector<std::pair<std::string, IouReport>>& columns,
                                  TableFormat format);

}  // namespace valvenet
