#ifndef GRADBALANCE_DIAGNOSTICS_HPP_
#define GRADBALANCE_DIAGNOSTICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gradbalance/gradient_set.hpp"
#include "gradbalance/mlp.hpp"

namespace gradbalance::diag {

// cos(g_i, d) per task; tasks with a zero gradient report 0 and a flag.
struct CosToAggregate {
  std::vector<double> values;
  std::vector<std::uint8_t> zero_flags;
};
CosToAggregate cos_to_aggregate(const GradientSet& gs,
                                std::span<const double> direction,
                                Scope scope = Scope::kFull);

// symmetric T x T matrices, row-major
std::vector<double> pairwise_cosine(const GradientSet& gs,
                                    Scope scope = Scope::kFull);
std::vector<double> pairwise_dot(const GradientSet& gs,
                                 Scope scope = Scope::kFull);

std::vector<double> grad_norms(const GradientSet& gs,
                               Scope scope = Scope::kFull);

// ---------------------------------------------------------------------------

struct TraceRecord {
  long step = 0;
  std::vector<double> loss;        // per task
  std::vector<double> weight;      // per task (1.0 for direction-only)
  std::vector<double> grad_norm;   // per task, raw scoped norm
  std::vector<double> cos_to_agg;  // per task
  std::vector<double> pair_cos;    // T x T
  std::vector<double> pair_dot;    // T x T
};

class Trace {
 public:
  Trace() = default;
  Trace(std::string method, std::uint64_t seed)
      : method_(std::move(method)), seed_(seed) {}

  void record_step(TraceRecord rec) { records_.push_back(std::move(rec)); }

  const std::vector<TraceRecord>& records() const { return records_; }
  const std::string& method() const { return method_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t task_count() const {
    return records_.empty() ? 0 : records_.front().loss.size();
  }

  // step,task,loss,weight,grad_norm,cos_to_agg (17 significant digits)
  void write_csv(const std::string& path) const;
  // step,task_i,task_j,cosine,dot (strict upper triangle)
  void write_pairwise_csv(const std::string& path) const;

  static Trace read_csv(const std::string& path);

 private:
  std::string method_;
  std::uint64_t seed_ = 0;
  std::vector<TraceRecord> records_;
};

// moving average over a trailing window; a report-time option, stored
// traces always keep the raw per-step values
std::vector<double> smoothed(std::span<const double> series,
                             std::size_t window);

// ---------------------------------------------------------------------------

// Per-task L2 distance between adapted MTL features and frozen STL
// features (linear adaptor fitted by least squares).
struct ProbeReport {
  std::vector<double> mean_sq_dist;       // per task
  std::vector<std::uint8_t> ridge_flags;  // normal equations needed a ridge
};

ProbeReport feature_alignment_probe(const MtlModel& mtl_model,
                                    std::span<const MtlModel> stl_models,
                                    const Batch& probe_batch);

void write_probe_csv(const ProbeReport& report, const std::string& path);

}  // namespace gradbalance::diag

#endif  // GRADBALANCE_DIAGNOSTICS_HPP_
