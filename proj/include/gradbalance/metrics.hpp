#ifndef GRADBALANCE_METRICS_HPP_
#define GRADBALANCE_METRICS_HPP_

#include <span>
#include <string>
#include <vector>

namespace gradbalance::metrics {

enum class MetricKind { kRmse, kAccuracy };

MetricKind metric_from_string(const std::string& s);
std::string metric_name(MetricKind kind);
bool metric_lower_is_better(MetricKind kind);

// rmse over values, accuracy over argmax(logits) vs labels
double metric_value(MetricKind kind, std::span<const double> preds,
                    std::span<const double> target_values,
                    std::span<const int> target_labels, std::size_t n,
                    std::size_t dim);

struct BaselineEntry {
  std::string task;
  std::string metric;
  double value = 0.0;
  bool lower_is_better = false;
};

struct BaselineTable {
  std::vector<BaselineEntry> entries;
};

struct DeltaM {
  std::vector<double> per_task_pct;  // M_i in percent
  double value_pct = 0.0;            // mean of M_i in percent
};

// M_i = (-1)^{l_i} (M_mtl,i - M_base,i) / M_base,i, averaged over tasks
DeltaM delta_m(std::span<const double> mtl_values, const BaselineTable& base);

// two decimals, round-half-even, matching tabular reporting
std::string format_pct(double pct);

}  // namespace gradbalance::metrics

#endif  // GRADBALANCE_METRICS_HPP_
