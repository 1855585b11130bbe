#ifndef GRADBALANCE_COMBINERS_HPP_
#define GRADBALANCE_COMBINERS_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gradbalance/gradient_set.hpp"
#include "gradbalance/rng.hpp"

namespace gradbalance::combiners {

struct SolverOptions {
  double tol = 1e-8;
  int max_iter = 200;
};

inline constexpr double kEpsNorm = 1e-10;

// ---------------------------------------------------------------------------
// Static weightings

CombineResult combine_uniform(const GradientSet& gs);
CombineResult combine_fixed(const GradientSet& gs,
                            std::span<const double> weights);

// w_i = S / ||g_i|| with S the norm of the summed task gradients, both
// measured on `scope`; the direction applies the weights to the full
// gradients. Equalizes every task's scoped post-weighting norm to S.
CombineResult avgnorm_weights(const GradientSet& gs,
                              Scope scope = Scope::kLastShared,
                              double eps_norm = kEpsNorm);

// ---------------------------------------------------------------------------
// Stateful loss weightings

struct UwState {
  std::vector<double> log_vars;  // s, one per task
  double inner_lr = 0.025;
};
// lambda_i = exp(-s_i)/2; s descends 1/2 sum_i exp(-s_i) L_i + s_i / 2
CombineResult uw_step(const GradientSet& gs, UwState& state);

struct GradNormState {
  std::vector<double> weights;
  std::vector<double> initial_losses;
  double exponent = 1.5;
  double inner_lr = 0.025;
  bool initialized = false;
};
CombineResult gradnorm_step(const GradientSet& gs, GradNormState& state);

struct DwaState {
  std::vector<double> prev, prev2;  // losses of the two previous calls
  double temperature = 2.0;
  long calls = 0;
};
CombineResult dwa_weights(const GradientSet& gs, DwaState& state);

CombineResult rlw_weights(const GradientSet& gs, Rng& rng);

struct FamoState {
  std::vector<double> logits;
  double inner_lr = 0.025;
  double decay = 0.001;
};
// weights from the current logits; the logit update needs the losses
// observed after the parameter step
CombineResult famo_weights(const GradientSet& gs, const FamoState& state);
void famo_update(FamoState& state, std::span<const double> losses_before,
                 std::span<const double> losses_after);
CombineResult famo_step(const GradientSet& gs, FamoState& state,
                        std::span<const double> next_losses);

// ---------------------------------------------------------------------------
// Gradient surgery / constrained updates

CombineResult pcgrad_combine(const GradientSet& gs, Rng& rng);
CombineResult cagrad_combine(const GradientSet& gs, double c,
                             const SolverOptions& opts = {});
CombineResult graddrop_combine(const GradientSet& gs, Rng& rng);

// Damped fixed point for w_i = ((Kw)_i)^-a, K = G G^T. NashMTL is a = 1,
// FairGrad keeps a free (default 2); both optimality conditions read
// w_i (g_i . d)^a = 1.
CombineResult bargain_weights(const GradientSet& gs, double exponent,
                              double damping = 0.5,
                              const SolverOptions& opts = {});

// ---------------------------------------------------------------------------
// Solver primitives

// Euclidean projection onto {w >= 0, sum w = 1} (sort and threshold)
std::vector<double> simplex_project(std::span<const double> v);

// gamma in [0,1] minimizing ||gamma g1 + (1-gamma) g2||; 1/2 when g1 == g2
double min_norm_gamma(std::span<const double> g1, std::span<const double> g2);

// Frank-Wolfe on min_{w in simplex} ||G^T w||^2
CombineResult mgda_weights(const GradientSet& gs, int max_iter = 200,
                           double tol = 1e-8);

// ---------------------------------------------------------------------------
// Method facade for the training loop

struct CombinerConfig {
  std::string id = "uniform";
  std::vector<double> fixed_weights;
  Scope avgnorm_scope = Scope::kLastShared;
  double uw_inner_lr = 0.025;
  double gradnorm_exponent = 1.5;
  double gradnorm_inner_lr = 0.025;
  double dwa_temperature = 2.0;
  double famo_inner_lr = 0.025;
  double famo_decay = 0.001;
  double cagrad_c = 0.4;
  double bargain_damping = 0.5;
  double fairgrad_exponent = 2.0;
  double eps_norm = kEpsNorm;
  SolverOptions solver;
  std::uint64_t seed = 0;  // stream for rlw / pcgrad / graddrop
};

class Combiner {
 public:
  virtual ~Combiner() = default;
  virtual CombineResult combine(const GradientSet& gs) = 0;
  // FAMO wants the losses realized after the parameter step
  virtual bool wants_post_step_losses() const { return false; }
  virtual void post_step_losses(std::span<const double>) {}
  virtual std::map<std::string, std::vector<double>> state_snapshot() const {
    return {};
  }
  const std::string& id() const { return id_; }

 protected:
  explicit Combiner(std::string id) : id_(std::move(id)) {}

 private:
  std::string id_;
};

std::unique_ptr<Combiner> make_combiner(const CombinerConfig& cfg,
                                        std::size_t tasks);
const std::vector<std::string>& combiner_ids();

// hyperparameter grids used by the comparison protocol
inline constexpr std::array<double, 6> kGradNormExponentGrid{0.1, 0.2, 0.5,
                                                             1.0, 1.5, 2.0};
inline constexpr std::array<double, 7> kDwaTemperatureGrid{0.5, 1.0, 1.5, 2.0,
                                                           2.5, 3.0, 4.0};

}  // namespace gradbalance::combiners

#endif  // GRADBALANCE_COMBINERS_HPP_
