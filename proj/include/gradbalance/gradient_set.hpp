#ifndef GRADBALANCE_GRADIENT_SET_HPP_
#define GRADBALANCE_GRADIENT_SET_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gradbalance {

enum class Scope { kFull, kLastShared };

// The T per-task gradients over the shared parameters, with the per-task
// loss values of the step they came from. `scope_begin/end` mark the
// last-shared-layer sub-range; methods that look at a single layer slice
// rows with scoped_row().
struct GradientSet {
  std::size_t tasks = 0;
  std::size_t dim = 0;
  std::vector<double> grads;   // row-major T x P
  std::vector<double> losses;  // length T
  long step = 0;
  std::size_t scope_begin = 0;
  std::size_t scope_end = 0;  // 0 means "whole vector"

  GradientSet() = default;
  GradientSet(std::size_t t, std::size_t p)
      : tasks(t), dim(p), grads(t * p, 0.0), losses(t, 0.0) {}

  std::span<const double> row(std::size_t i) const {
    return {grads.data() + i * dim, dim};
  }
  std::span<double> row(std::size_t i) {
    return {grads.data() + i * dim, dim};
  }
  std::span<const double> scoped_row(std::size_t i, Scope scope) const {
    if (scope == Scope::kFull || scope_end == 0) return row(i);
    return {grads.data() + i * dim + scope_begin, scope_end - scope_begin};
  }

  // throws NumericError / ConfigError on NaN or shape problems
  void validate() const;
};

// Task weights and/or a combined update direction. Direction-only methods
// leave `weights` empty. For weight-based methods the direction is always
// rebuilt from the weights through weighted_sum(), so d == sum_i w_i g_i
// holds bit-for-bit.
struct CombineResult {
  std::vector<double> weights;
  std::vector<double> direction;
  std::map<std::string, double> aux;

  bool has_weights() const { return !weights.empty(); }
};

// d[p] = sum over tasks (in task order) of w[t] * g[t][p]
std::vector<double> weighted_sum(const GradientSet& gs,
                                 std::span<const double> w);

}  // namespace gradbalance

#endif  // GRADBALANCE_GRADIENT_SET_HPP_
