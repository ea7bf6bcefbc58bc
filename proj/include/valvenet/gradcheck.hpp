#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace valvenet {

/// One parameter block under test. `point` aliases the storage the loss
/// closure reads, so the harness perturbs it in place (and restores it).
struct GradBlock {
  std::string name;
  std::span<double> point;
  std::span<const double> analytic;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor of the relative error; entries whose analytic and
  // numeric gradients are both below it are compared absolutely.
  double abs_floor = 1e-6;
  // Optional fingerprint of the map's non-differentiable branch choices
  // (e.g. relu masks). If the +step and -step evaluations disagree the entry
  // straddles a kink and is skipped rather than judged.
  std::function<std::uint64_t()> kink_signature;
  // 0 checks every entry; otherwise at most this many, evenly strided.
  std::size_t max_entries_per_block = 0;
};

struct GradBlockReport {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradBlockReport> blocks;
  double tolerance = 0.0;

  bool passed() const;
  double max_rel_error() const;
  std::size_t checked() const;
  std::size_t skipped() const;
  std::string summary() const;
};

double relative_error(double analytic, double numeric, double abs_floor);

/// Compares each analytic entry against the central difference
/// (f(x+h) - f(x-h)) / 2h. Failures are report entries, never exceptions.
GradCheckReport grad_check(const std::function<double()>& loss,
                           std::span<GradBlock> blocks,
                           const GradCheckOptions& options = {});

}  // namespace valvenet
