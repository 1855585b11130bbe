#ifndef GRADBALANCE_PROBLEMS_HPP_
#define GRADBALANCE_PROBLEMS_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gradbalance/metrics.hpp"
#include "gradbalance/mlp.hpp"

namespace gradbalance::problems {

enum class TaskKind { kRegression, kClassification, kBinary };

struct TaskSpec {
  std::string id;
  TaskKind kind = TaskKind::kRegression;
  std::size_t output_dim = 1;
  double scale = 1.0;  // loss multiplier, > 0
  metrics::MetricKind metric = metrics::MetricKind::kRmse;
  bool lower_is_better = true;

  LossKind loss_kind() const;
};

// Everything needed to regenerate the data bit-identically.
struct DatasetSpec {
  std::uint64_t seed = 0;
  std::size_t tasks = 3;
  std::size_t input_dim = 16;
  std::size_t latent_dim = 8;
  std::size_t n_train = 2048;
  std::size_t n_val = 512;
  std::size_t n_test = 512;
  std::size_t groups = 8;  // scene analog; scans = n / groups
  std::vector<double> scales;
  double noise = 0.1;
  bool identical_tasks = false;  // all-regression symmetric suite
  std::size_t classes = 4;
  // optional minimum top-1/top-2 logit gap for generated class labels;
  // samples are redrawn until they clear it (0 = off)
  double class_margin = 0.0;
};

struct SyntheticDataset {
  DatasetSpec spec;
  std::vector<TaskSpec> tasks;
  Batch train, val, test;
};

// Shared latent z = B x; task targets are per-task linear readouts of z
// (argmax readout for the classification task). Loss-scale imbalance comes
// from DatasetSpec::scales, never from target magnitudes, so single-task
// optima do not move with the scale.
SyntheticDataset gen_scaled_suite(const DatasetSpec& spec);

// Reduce a dataset to a single task (for single-task training).
SyntheticDataset restrict_to_task(const SyntheticDataset& ds, std::size_t t);

// Train-split label corruption: classification labels flip to a uniformly
// different class with probability flip_p; regression/binary targets get
// N(0, sigma^2) noise. Val/test untouched.
SyntheticDataset corrupt_labels(const SyntheticDataset& ds, double flip_p,
                                double gauss_sigma);

enum class SubsampleMode { kGroups, kWithinGroups };

// amount <= 1 is a fraction, amount > 1 an absolute count (groups kept or
// samples kept per group). Train split only, deterministic under the
// dataset seed.
SyntheticDataset subsample(const SyntheticDataset& ds, SubsampleMode mode,
                           double amount);

// Two explicit 2D objectives used as the Pareto-stationarity test bed:
//   f1(x) = (x1-1)^2 + (x2-1)^2/4
//   f2(x) = beta ((x1+1)^2 + (x2+1)^2/4)
struct ToyLandscape {
  double beta = 1.0;
  double f1(std::array<double, 2> x) const;
  double f2(std::array<double, 2> x) const;
  std::array<double, 2> grad_f1(std::array<double, 2> x) const;
  std::array<double, 2> grad_f2(std::array<double, 2> x) const;
};

ToyLandscape gen_toy_landscape(double beta = 1.0);

}  // namespace gradbalance::problems

#endif  // GRADBALANCE_PROBLEMS_HPP_
