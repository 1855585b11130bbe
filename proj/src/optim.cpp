#include "gradbalance/optim.hpp"

#include <cmath>

#include "gradbalance/errors.hpp"

namespace gradbalance {

namespace {
void check_dir(std::span<const double> dir, std::span<const double> params) {
  if (dir.size() != params.size())
    throw ConfigError("update direction length does not match parameters");
  for (double d : dir)
    if (!std::isfinite(d)) throw NumericError("non-finite update direction");
}
}  // namespace

void sgd_step(std::span<double> params, std::span<const double> dir,
              double lr) {
  check_dir(dir, params);
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * dir[i];
}

void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> dir, double lr) {
  check_dir(dir, params);
  if (state.m.size() != params.size()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
    state.t = 0;
  }
  state.t += 1;
  const double c1 = 1.0 - std::pow(state.beta1, double(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, double(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * dir[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * dir[i] * dir[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
  }
}

}  // namespace gradbalance
