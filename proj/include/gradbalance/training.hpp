#ifndef GRADBALANCE_TRAINING_HPP_
#define GRADBALANCE_TRAINING_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "gradbalance/combiners.hpp"
#include "gradbalance/diagnostics.hpp"
#include "gradbalance/metrics.hpp"
#include "gradbalance/problems.hpp"

namespace gradbalance::problems {

struct ModelConfig {
  std::vector<std::size_t> hidden{32, 32};
  Activation activation = Activation::kTanh;
  double init_range = 0.0;
};

struct TrainConfig {
  long steps = 2000;
  double lr = 0.004;
  std::size_t batch_size = 128;  // 0 = full batch
  std::string optimizer = "adam";
  std::string lr_schedule = "poly";  // poly (power 0.9) or const
  long eval_stride = 100;  // validation cadence for best-step selection
  bool best_val_select = true;
  long trace_stride = 0;
  double divergence_threshold = 1e12;
};

struct TrainOutcome {
  MtlModel model;  // parameters of the selected step
  diag::Trace trace;
  long best_step = -1;       // -1 when selection is off
  double best_val_score = 0.0;
  std::vector<double> final_losses;
  long steps_run = 0;

  explicit TrainOutcome(MtlModel m) : model(std::move(m)) {}
};

// One shared-encoder training run: forward, per-task losses and shared
// gradients, combine, step. Weight-based combiners also scale the decoder
// gradients by their task weight; direction-only ones leave them alone.
// When `val_baseline` is given the returned model is the step with the
// best validation delta_m against it; a single-task run selects by its own
// validation metric instead.
TrainOutcome train_mtl(const ModelConfig& model_cfg,
                       const SyntheticDataset& ds,
                       combiners::Combiner& combiner, const TrainConfig& cfg,
                       std::uint64_t seed,
                       const metrics::BaselineTable* val_baseline = nullptr);

// Independent single-task training of task t, identical to train_mtl on
// the dataset restricted to that task.
TrainOutcome train_stl(const ModelConfig& model_cfg,
                       const SyntheticDataset& ds, std::size_t task,
                       const TrainConfig& cfg, std::uint64_t seed);

// Per-task metric values on a split. Side-effect free.
std::vector<double> evaluate(const MtlModel& model, const Batch& split,
                             const std::vector<TaskSpec>& tasks);

std::vector<MtlModel::TaskLossSpec> loss_specs(
    const std::vector<TaskSpec>& tasks);

MlpConfig make_mlp_config(const ModelConfig& cfg, const SyntheticDataset& ds);

}  // namespace gradbalance::problems

#endif  // GRADBALANCE_TRAINING_HPP_
