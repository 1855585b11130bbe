#ifndef GRADBALANCE_HARNESS_HPP_
#define GRADBALANCE_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gradbalance/config.hpp"
#include "gradbalance/diagnostics.hpp"
#include "gradbalance/metrics.hpp"
#include "gradbalance/problems.hpp"
#include "gradbalance/training.hpp"

namespace gradbalance::harness {

struct TaskStats {
  std::string task;
  std::string metric;
  double mean = 0.0;
  double std_dev = 0.0;
};

struct RunSummary {
  std::string config_hash;
  std::string combiner;
  std::vector<std::uint64_t> seeds;
  std::vector<TaskStats> per_task;
  double delta_m_mean = 0.0;
  double delta_m_std = 0.0;
  std::vector<double> chosen_weights;  // grid winners only
  double wall_time_s = 0.0;

  std::string to_json() const;
  void write(const std::string& path) const;
};

// Dataset plus single-task baselines for one seed; shared read-only by
// every cell that trains on this seed.
struct SeedContext {
  std::uint64_t seed = 0;
  problems::SyntheticDataset ds;
  metrics::BaselineTable val_table;
  metrics::BaselineTable test_table;
  std::vector<MtlModel> stl_models;  // kept only when a probe needs them
};

SeedContext prepare_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                         bool keep_stl_models = false);

struct CellOutcome {
  std::vector<double> test_metrics;
  metrics::DeltaM dm;
  metrics::DeltaM val_dm;
  diag::Trace trace;
  long best_step = -1;
  std::optional<MtlModel> model;  // only when requested
};

// Train the configured combiner on one prepared seed and score it.
CellOutcome run_cell(const ExperimentConfig& cfg, const SeedContext& ctx,
                     const combiners::CombinerConfig& combiner_cfg,
                     bool keep_model = false);

RunSummary summarize(const ExperimentConfig& cfg, const std::string& combiner,
                     const std::vector<SeedContext>& contexts,
                     const std::vector<CellOutcome>& cells, double wall_s);

// run independent jobs over [0, n) on up to `jobs` threads; results must be
// written to pre-sized slots so aggregation order is fixed
void parallel_cells(int jobs, std::size_t n,
                    const std::function<void(std::size_t)>& fn);

// Full CLI (run | grid | sweep | diagnose | report). Returns the process
// exit code: 0 ok, 1 runtime/numeric failure, 2 config error.
int run_cli(const std::vector<std::string>& args);

}  // namespace gradbalance::harness

#endif  // GRADBALANCE_HARNESS_HPP_
