#include "valvenet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace valvenet {

bool GradCheckReport::passed() const {
  return std::all_of(blocks.begin(), blocks.end(),
                     [](const GradBlockReport& b) { return b.passed; });
}

double GradCheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& b : blocks) m = std::max(m, b.max_rel_error);
  return m;
}

std::size_t GradCheckReport::checked() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.checked;
  return n;
}

std::size_t GradCheckReport::skipped() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.skipped;
  return n;
}

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  for (const auto& b : blocks) {
    os << b.name << ": max rel " << b.max_rel_error << " (abs " << b.max_abs_error
       << ", worst #" << b.worst_index << "), checked " << b.checked << ", skipped "
       << b.skipped << (b.passed ? " ok" : " FAIL") << '\n';
  }
  return os.str();
}

double relative_error(double analytic, double numeric, double abs_floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), abs_floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(const std::function<double()>& loss,
                           std::span<GradBlock> blocks,
                           const GradCheckOptions& options) {
  GradCheckReport report;
  report.tolerance = options.tolerance;
  const double h = options.step;
  for (auto& block : blocks) {
    GradBlockReport br;
    br.name = block.name;
    const std::size_t n = block.point.size();
    std::size_t stride = 1;
    if (options.max_entries_per_block > 0 && n > options.max_entries_per_block) {
      stride = (n + options.max_entries_per_block - 1) / options.max_entries_per_block;
    }
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = block.point[i];
      block.point[i] = saved + h;
      const double plus = loss();
      const std::uint64_t sig_plus = options.kink_signature ? options.kink_signature() : 0;
      block.point[i] = saved - h;
      const double minus = loss();
      const std::uint64_t sig_minus = options.kink_signature ? options.kink_signature() : 0;
      block.point[i] = saved;
      if (sig_plus != sig_minus) {
        ++br.skipped;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * h);
      const double analytic = block.analytic[i];
      const double rel = relative_error(analytic, numeric, options.abs_floor);
      const double abs_err = std::abs(analytic - numeric);
      if (rel > br.max_rel_error || br.checked == 0) {
        if (rel >= br.max_rel_error) br.worst_index = i;
        br.max_rel_error = std::max(br.max_rel_error, rel);
      }
      br.max_abs_error = std::max(br.max_abs_error, abs_err);
      ++br.checked;
    }
    br.passed = br.max_rel_error < options.tolerance;
    report.blocks.push_back(std::move(br));
  }
  return report;
}

}  // namespace valvenet
