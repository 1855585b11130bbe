#include "gradbalance/gradient_set.hpp"

#include <cmath>
#include <string>

#include "gradbalance/errors.hpp"
#include "gradbalance/kernels.hpp"

namespace gradbalance {

void GradientSet::validate() const {
  if (tasks == 0) throw ConfigError("gradient set needs at least one task");
  if (grads.size() != tasks * dim)
    throw ConfigError("gradient matrix size mismatch");
  if (losses.size() != tasks)
    throw ConfigError("loss vector length does not match task count");
  if (scope_end > dim || scope_begin > scope_end)
    throw ConfigError("invalid scope range");
  for (std::size_t t = 0; t < tasks; ++t) {
    for (double v : row(t))
      if (!std::isfinite(v))
        throw NumericError("non-finite gradient entry", static_cast<int>(t));
    if (!std::isfinite(losses[t]))
      throw NumericError("non-finite loss", static_cast<int>(t));
  }
}

std::vector<double> weighted_sum(const GradientSet& gs,
                                 std::span<const double> w) {
  std::vector<double> d(gs.dim, 0.0);
  for (std::size_t t = 0; t < gs.tasks; ++t) {
    kernels::axpy(w[t], gs.row(t).data(), d.data(), gs.dim);
  }
  return d;
}

}  // namespace gradbalance
