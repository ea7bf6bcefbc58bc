#include "valvenet/optim.hpp"

#include <cmath>

#include "valvenet/error.hpp"

namespace valvenet {

template <typename T>
void adam_step(std::vector<ParamRef<T>>& params, AdamState& state, double lr_scale) {
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.value.size(), 0.0);
      state.v.emplace_back(p.value.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("adam: state tracks " + std::to_string(state.m.size()) +
                     " blocks, got " + std::to_string(params.size()));
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    const auto& p = params[b];
    if (p.grad.size() != p.value.size() || state.m[b].size() != p.value.size()) {
      throw ShapeError("adam: size mismatch in block '" + p.name + "'");
    }
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      if (!std::isfinite(static_cast<double>(p.grad[i]))) {
        throw Error("adam: non-finite gradient in block '" + p.name + "' at index " +
                    std::to_string(i));
      }
    }
  }

  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  const double lr = c.lr * lr_scale;
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto& p = params[b];
    auto& m = state.m[b];
    auto& v = state.v[b];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value[i] = static_cast<T>(p.value[i] - lr * mhat / (std::sqrt(vhat) + c.eps));
    }
  }
}

template void adam_step<float>(std::vector<ParamRef<float>>&, AdamState&, double);
template void adam_step<double>(std::vector<ParamRef<double>>&, AdamState&, double);

}  // namespace valvenet
