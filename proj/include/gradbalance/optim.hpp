#ifndef GRADBALANCE_OPTIM_HPP_
#define GRADBALANCE_OPTIM_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace gradbalance {

// params -= lr * dir
void sgd_step(std::span<double> params, std::span<const double> dir, double lr);

struct AdamState {
  std::vector<double> m, v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n = 0, double b1 = 0.9, double b2 = 0.999,
                     double e = 1e-8)
      : m(n, 0.0), v(n, 0.0), beta1(b1), beta2(b2), eps(e) {}
};

void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> dir, double lr);

}  // namespace gradbalance

#endif  // GRADBALANCE_OPTIM_HPP_
