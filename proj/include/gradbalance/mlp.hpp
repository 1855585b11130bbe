#ifndef GRADBALANCE_MLP_HPP_
#define GRADBALANCE_MLP_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gradbalance/rng.hpp"

namespace gradbalance {

enum class Activation { kTanh, kRelu, kIdentity };
enum class LossKind { kSquaredError, kSoftmaxCrossEntropy, kWeightedBce };

Activation activation_from_string(const std::string& s);

// One minibatch (or a whole split). Inputs are row-major n x input_dim.
// Regression/binary targets live in `values` (row-major n x output_dim),
// classification labels in `labels`.
struct TaskTargets {
  std::vector<double> values;
  std::vector<int> labels;
};

struct Batch {
  std::size_t n = 0;
  std::size_t input_dim = 0;
  std::vector<double> inputs;
  std::vector<TaskTargets> targets;
  std::vector<int> group_ids;

  Batch gather(std::span<const std::size_t> idx) const;
};

// Index range [begin, end) into the flattened shared parameter vector.
struct ParamSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

struct MlpConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  Activation activation = Activation::kTanh;
  std::vector<std::size_t> head_dims;  // one entry per task
  double init_range = 0.0;             // 0 -> 1/sqrt(fan_in) per layer
};

// Shared tanh/relu encoder plus one linear head per task. All shared
// parameters live in one flat vector (layer views index into it), so
// flatten/unflatten is the identity and per-task shared gradients come out
// as flat vectors directly.
class MtlModel {
 public:
  MtlModel(const MlpConfig& cfg, Rng& init_rng);

  std::size_t task_count() const { return heads_.size(); }
  std::size_t input_dim() const { return cfg_.input_dim; }
  std::size_t feature_dim() const;  // width of the last shared layer
  std::size_t shared_dim() const { return phi_.size(); }
  std::size_t head_dim(std::size_t t) const { return heads_[t].out; }
  std::size_t head_param_count(std::size_t t) const;
  ParamSpan last_shared_span() const { return last_shared_; }

  std::span<double> shared_params() { return phi_; }
  std::span<const double> shared_params() const { return phi_; }
  std::span<double> head_params(std::size_t t) { return psi_[t]; }
  std::span<const double> head_params(std::size_t t) const { return psi_[t]; }

  const MlpConfig& config() const { return cfg_; }

  struct ForwardCache {
    std::size_t n = 0;
    // activations[0] is the input copy; activations[l] the output of shared
    // layer l. logits[t] is row-major n x head_dim(t).
    std::vector<std::vector<double>> activations;
    std::vector<std::vector<double>> logits;
    std::span<const double> features() const { return activations.back(); }
  };

  ForwardCache forward(const Batch& batch) const;

  // Per-task losses and gradients; every task sees only its own loss.
  struct Backward {
    std::vector<double> losses;                      // scaled, per task
    std::vector<std::vector<double>> shared_grads;   // per task, |phi|
    std::vector<std::vector<double>> head_grads;     // per task, |psi_t|
  };

  struct TaskLossSpec {
    LossKind kind = LossKind::kSquaredError;
    double scale = 1.0;
    double bce_pos_weight = 0.95;
  };

  Backward backward_per_task(const Batch& batch, const ForwardCache& cache,
                             std::span<const TaskLossSpec> losses) const;

  // Loss (and optional dLoss/dlogits) for one task on given logits.
  static double task_loss(const TaskLossSpec& spec,
                          std::span<const double> logits,
                          const TaskTargets& targets, std::size_t n,
                          std::size_t dim, std::vector<double>* dlogits);

 private:
  struct LayerView {
    std::size_t w = 0;  // offset of W (out x in, row-major) in phi_
    std::size_t b = 0;  // offset of bias
    std::size_t in = 0;
    std::size_t out = 0;
  };
  struct Head {
    std::size_t in = 0;
    std::size_t out = 0;
  };

  void backprop_shared(const Batch& batch, const ForwardCache& cache,
                       std::vector<double>& delta, double* grad) const;

  MlpConfig cfg_;
  std::vector<LayerView> layers_;
  std::vector<Head> heads_;
  std::vector<double> phi_;
  std::vector<std::vector<double>> psi_;
  ParamSpan last_shared_;
};

// Sub-vector of a flat shared gradient covering the model's last shared
// layer; with a span covering everything this is the identity.
std::vector<double> restrict_to_last_shared(std::span<const double> g,
                                            const MtlModel& model);

}  // namespace gradbalance

#endif  // GRADBALANCE_MLP_HPP_
