#include "gradbalance/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "gradbalance/errors.hpp"

namespace gradbalance::metrics {

MetricKind metric_from_string(const std::string& s) {
  if (s == "rmse") return MetricKind::kRmse;
  if (s == "accuracy") return MetricKind::kAccuracy;
  throw ConfigError("unknown metric: " + s);
}

std::string metric_name(MetricKind kind) {
  return kind == MetricKind::kRmse ? "rmse" : "accuracy";
}

bool metric_lower_is_better(MetricKind kind) {
  return kind == MetricKind::kRmse;
}

double metric_value(MetricKind kind, std::span<const double> preds,
                    std::span<const double> target_values,
                    std::span<const int> target_labels, std::size_t n,
                    std::size_t dim) {
  if (n == 0) throw ConfigError("metric over empty split");
  switch (kind) {
    case MetricKind::kRmse: {
      if (target_values.size() != n * dim)
        throw ConfigError("rmse: target size mismatch");
      double acc = 0.0;
      for (std::size_t i = 0; i < n * dim; ++i) {
        const double r = preds[i] - target_values[i];
        acc += r * r;
      }
      return std::sqrt(acc / double(n * dim));
    }
    case MetricKind::kAccuracy: {
      if (target_labels.size() != n)
        throw ConfigError("accuracy: label count mismatch");
      std::size_t hits = 0;
      for (std::size_t s = 0; s < n; ++s) {
        const double* p = preds.data() + s * dim;
        std::size_t best = 0;
        for (std::size_t k = 1; k < dim; ++k)
          if (p[k] > p[best]) best = k;
        if (static_cast<int>(best) == target_labels[s]) ++hits;
      }
      return double(hits) / double(n);
    }
  }
  throw ConfigError("unhandled metric kind");
}

DeltaM delta_m(std::span<const double> mtl_values, const BaselineTable& base) {
  if (mtl_values.size() != base.entries.size())
    throw ConfigError("delta_m: task count mismatch between values and table");
  DeltaM out;
  double sum = 0.0;
  for (std::size_t i = 0; i < mtl_values.size(); ++i) {
    const BaselineEntry& e = base.entries[i];
    if (e.value == 0.0)
      throw ConfigError("delta_m: zero baseline for task " + e.task);
    const double sign = e.lower_is_better ? -1.0 : 1.0;
    const double m = sign * (mtl_values[i] - e.value) / e.value * 100.0;
    out.per_task_pct.push_back(m);
    sum += m;
  }
  out.value_pct = sum / double(mtl_values.size());
  return out;
}

std::string format_pct(double pct) {
  // nearbyint under the default FP environment rounds half to even
  const double r = std::nearbyint(pct * 100.0);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.2f", r / 100.0);
  return buf;
}

}  // namespace gradbalance::metrics
