#include "gradbalance/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gradbalance/errors.hpp"

namespace gradbalance::problems {

LossKind TaskSpec::loss_kind() const {
  switch (kind) {
    case TaskKind::kRegression:
      return LossKind::kSquaredError;
    case TaskKind::kClassification:
      return LossKind::kSoftmaxCrossEntropy;
    case TaskKind::kBinary:
      return LossKind::kWeightedBce;
  }
  throw ConfigError("unhandled task kind");
}

namespace {

struct GroundTruth {
  std::vector<double> mixing;                 // latent x input_dim
  std::vector<std::vector<double>> readouts;  // per task, output_dim x latent
  std::vector<double> group_centers;          // groups x input_dim
};

GroundTruth draw_ground_truth(const DatasetSpec& spec,
                              const std::vector<TaskSpec>& tasks) {
  Rng rng(spec.seed, streams::kDataMaps);
  GroundTruth gt;
  gt.mixing.resize(spec.latent_dim * spec.input_dim);
  const double mix_scale = 1.0 / std::sqrt(double(spec.input_dim));
  for (double& v : gt.mixing) v = rng.normal() * mix_scale;

  gt.group_centers.resize(spec.groups * spec.input_dim);
  for (double& v : gt.group_centers) v = rng.normal() * 0.5;

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    std::vector<double> a(tasks[t].output_dim * spec.latent_dim);
    if (spec.identical_tasks && t > 0 &&
        tasks[t].output_dim == tasks[0].output_dim) {
      a = gt.readouts[0];
    } else {
      for (double& v : a) v = rng.normal();
      // unit rows keep targets O(1) regardless of latent_dim
      for (std::size_t o = 0; o < tasks[t].output_dim; ++o) {
        double n2 = 0.0;
        for (std::size_t l = 0; l < spec.latent_dim; ++l)
          n2 += a[o * spec.latent_dim + l] * a[o * spec.latent_dim + l];
        const double inv = 1.0 / std::sqrt(std::max(n2, 1e-12));
        for (std::size_t l = 0; l < spec.latent_dim; ++l)
          a[o * spec.latent_dim + l] *= inv;
      }
    }
    gt.readouts.push_back(std::move(a));
  }
  return gt;
}

Batch draw_split(const DatasetSpec& spec, const std::vector<TaskSpec>& tasks,
                 const GroundTruth& gt, std::size_t n, std::uint64_t split_id) {
  Rng in_rng(spec.seed, streams::kDataInputs + 16 * split_id);
  Rng noise_rng(spec.seed, streams::kDataNoise + 16 * split_id);

  // the classification readout, when present, constrains the input draw
  const std::vector<double>* cls_readout = nullptr;
  std::size_t cls_classes = 0;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (tasks[t].kind == TaskKind::kClassification) {
      cls_readout = &gt.readouts[t];
      cls_classes = tasks[t].output_dim;
      break;
    }
  }

  Batch b;
  b.n = n;
  b.input_dim = spec.input_dim;
  b.inputs.resize(n * spec.input_dim);
  b.group_ids.resize(n);
  std::vector<double> latent(n * spec.latent_dim, 0.0);
  std::vector<double> x(spec.input_dim), z(spec.latent_dim);
  const std::size_t per_group = std::max<std::size_t>(1, n / spec.groups);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t g = std::min(s / per_group, spec.groups - 1);
    b.group_ids[s] = static_cast<int>(g);
    while (true) {
      for (std::size_t i = 0; i < spec.input_dim; ++i)
        x[i] = gt.group_centers[g * spec.input_dim + i] + in_rng.normal();
      for (std::size_t l = 0; l < spec.latent_dim; ++l) {
        double acc = 0.0;
        for (std::size_t i = 0; i < spec.input_dim; ++i)
          acc += gt.mixing[l * spec.input_dim + i] * x[i];
        z[l] = acc;
      }
      if (!cls_readout || spec.class_margin <= 0.0) break;
      // redraw until z clears every class hyperplane by the margin
      std::size_t bits = 0;
      while ((1u << bits) < cls_classes) ++bits;
      const std::size_t planes = bits + 1;
      double margin = 1e300;
      for (std::size_t p = 0; p < planes; ++p) {
        double acc = 0.0;
        for (std::size_t l = 0; l < spec.latent_dim; ++l)
          acc += (*cls_readout)[(p % cls_classes) * spec.latent_dim + l] * z[l];
        margin = std::min(margin, std::abs(acc));
      }
      if (margin >= spec.class_margin) break;
    }
    std::copy(x.begin(), x.end(), b.inputs.begin() + s * spec.input_dim);
    std::copy(z.begin(), z.end(), latent.begin() + s * spec.latent_dim);
  }

  b.targets.resize(tasks.size());
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const TaskSpec& ts = tasks[t];
    const std::vector<double>& a = gt.readouts[t];
    std::vector<double> logits(n * ts.output_dim);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t o = 0; o < ts.output_dim; ++o) {
        double acc = 0.0;
        for (std::size_t l = 0; l < spec.latent_dim; ++l)
          acc += a[o * spec.latent_dim + l] * latent[s * spec.latent_dim + l];
        logits[s * ts.output_dim + o] = acc + spec.noise * noise_rng.normal();
      }
    }
    TaskTargets& tt = b.targets[t];
    switch (ts.kind) {
      case TaskKind::kRegression:
        tt.values = std::move(logits);
        break;
      case TaskKind::kClassification: {
        // XOR-folded cells of z against latent hyperplanes: each class bit
        // is the parity of two adjacent halfspace bits, so no linear
        // readout separates the classes and the encoder has to build
        // features for this task specifically. A small sigma-coupled flip
        // rate is the annotation-noise floor; explicit corruption on top
        // of it stays corrupt_labels' job.
        tt.labels.resize(n);
        const int classes = static_cast<int>(ts.output_dim);
        std::size_t bits = 0;
        while ((1u << bits) < ts.output_dim) ++bits;
        const std::size_t planes = bits + 1;
        const double flip_p = std::min(0.25, spec.noise / 2.0);
        for (std::size_t s = 0; s < n; ++s) {
          std::vector<int> halfspace(planes);
          for (std::size_t p = 0; p < planes; ++p) {
            double acc = 0.0;
            for (std::size_t l = 0; l < spec.latent_dim; ++l)
              acc += a[(p % ts.output_dim) * spec.latent_dim + l] *
                     latent[s * spec.latent_dim + l];
            halfspace[p] = acc > 0.0 ? 1 : 0;
          }
          int label = 0;
          for (std::size_t k = 0; k < bits; ++k)
            label = 2 * label + (halfspace[k] ^ halfspace[k + 1]);
          if (flip_p > 0.0 && noise_rng.uniform() < flip_p) {
            label = (label + 1 +
                     static_cast<int>(noise_rng.below(classes - 1))) %
                    classes;
          }
          tt.labels[s] = label;
        }
        break;
      }
      case TaskKind::kBinary: {
        tt.values.resize(n * ts.output_dim);
        for (std::size_t i = 0; i < tt.values.size(); ++i)
          tt.values[i] = logits[i] > 0.0 ? 1.0 : 0.0;
        break;
      }
    }
  }
  return b;
}

}  // namespace

SyntheticDataset gen_scaled_suite(const DatasetSpec& spec) {
  if (spec.tasks == 0) throw ConfigError("dataset needs at least one task");
  if (spec.input_dim == 0 || spec.latent_dim == 0)
    throw ConfigError("dataset dims must be positive");
  if (!spec.scales.empty() && spec.scales.size() != spec.tasks)
    throw ConfigError("scales length does not match task count");
  for (double s : spec.scales)
    if (s <= 0.0) throw ConfigError("task scales must be positive");

  SyntheticDataset ds;
  ds.spec = spec;
  for (std::size_t t = 0; t < spec.tasks; ++t) {
    TaskSpec ts;
    ts.scale = spec.scales.empty() ? 1.0 : spec.scales[t];
    // task 2 is the classification analog unless the suite is symmetric
    if (!spec.identical_tasks && spec.tasks >= 3 && t == 2) {
      ts.id = "cls" + std::to_string(t);
      ts.kind = TaskKind::kClassification;
      ts.output_dim = spec.classes;
      ts.metric = metrics::MetricKind::kAccuracy;
      ts.lower_is_better = false;
    } else {
      ts.id = "reg" + std::to_string(t);
      ts.kind = TaskKind::kRegression;
      ts.output_dim = 1;
      ts.metric = metrics::MetricKind::kRmse;
      ts.lower_is_better = true;
    }
    ds.tasks.push_back(std::move(ts));
  }

  const GroundTruth gt = draw_ground_truth(spec, ds.tasks);
  ds.train = draw_split(spec, ds.tasks, gt, spec.n_train, 0);
  ds.val = draw_split(spec, ds.tasks, gt, spec.n_val, 1);
  ds.test = draw_split(spec, ds.tasks, gt, spec.n_test, 2);
  return ds;
}

SyntheticDataset restrict_to_task(const SyntheticDataset& ds, std::size_t t) {
  if (t >= ds.tasks.size()) throw ConfigError("task index out of range");
  SyntheticDataset out;
  out.spec = ds.spec;
  out.spec.tasks = 1;
  if (!out.spec.scales.empty()) out.spec.scales = {ds.tasks[t].scale};
  out.tasks = {ds.tasks[t]};
  for (const Batch* src : {&ds.train, &ds.val, &ds.test}) {
    Batch b;
    b.n = src->n;
    b.input_dim = src->input_dim;
    b.inputs = src->inputs;
    b.group_ids = src->group_ids;
    b.targets = {src->targets[t]};
    if (src == &ds.train)
      out.train = std::move(b);
    else if (src == &ds.val)
      out.val = std::move(b);
    else
      out.test = std::move(b);
  }
  return out;
}

SyntheticDataset corrupt_labels(const SyntheticDataset& ds, double flip_p,
                                double gauss_sigma) {
  if (flip_p < 0.0 || flip_p >= 1.0)
    throw ConfigError("flip_p must be in [0, 1)");
  if (gauss_sigma < 0.0) throw ConfigError("gauss_sigma must be >= 0");

  SyntheticDataset out = ds;
  Rng rng(ds.spec.seed, streams::kCorruption);
  for (std::size_t t = 0; t < out.tasks.size(); ++t) {
    const TaskSpec& ts = out.tasks[t];
    TaskTargets& tt = out.train.targets[t];
    switch (ts.kind) {
      case TaskKind::kClassification: {
        if (flip_p == 0.0) break;
        for (int& label : tt.labels) {
          if (rng.uniform() < flip_p) {
            // uniformly different class
            const int shift =
                1 + static_cast<int>(rng.below(ts.output_dim - 1));
            label = (label + shift) % static_cast<int>(ts.output_dim);
          }
        }
        break;
      }
      case TaskKind::kRegression: {
        if (gauss_sigma == 0.0) break;
        for (double& v : tt.values) v += gauss_sigma * rng.normal();
        break;
      }
      case TaskKind::kBinary: {
        if (flip_p == 0.0) break;
        for (double& v : tt.values)
          if (rng.uniform() < flip_p) v = 1.0 - v;
        break;
      }
    }
  }
  return out;
}

SyntheticDataset subsample(const SyntheticDataset& ds, SubsampleMode mode,
                           double amount) {
  if (amount <= 0.0) throw ConfigError("subsample amount must be positive");

  // per-group sample indices in original order
  std::vector<std::vector<std::size_t>> by_group;
  for (std::size_t s = 0; s < ds.train.n; ++s) {
    const std::size_t g = static_cast<std::size_t>(ds.train.group_ids[s]);
    if (g >= by_group.size()) by_group.resize(g + 1);
    by_group[g].push_back(s);
  }

  Rng rng(ds.spec.seed, streams::kSubsample);
  std::vector<std::size_t> keep;
  if (mode == SubsampleMode::kGroups) {
    const std::size_t total = by_group.size();
    std::size_t n_keep =
        amount <= 1.0
            ? static_cast<std::size_t>(std::floor(amount * double(total)))
            : static_cast<std::size_t>(amount);
    n_keep = std::clamp<std::size_t>(n_keep, 1, total);
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    order.resize(n_keep);
    std::sort(order.begin(), order.end());
    for (std::size_t g : order)
      keep.insert(keep.end(), by_group[g].begin(), by_group[g].end());
  } else {
    for (const std::vector<std::size_t>& members : by_group) {
      if (members.empty()) continue;
      std::size_t n_keep =
          amount <= 1.0
              ? static_cast<std::size_t>(std::floor(amount * double(members.size())))
              : static_cast<std::size_t>(amount);
      n_keep = std::clamp<std::size_t>(n_keep, 1, members.size());
      std::vector<std::size_t> order(members.size());
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      order.resize(n_keep);
      std::sort(order.begin(), order.end());
      for (std::size_t i : order) keep.push_back(members[i]);
    }
  }
  std::sort(keep.begin(), keep.end());
  if (keep.empty()) throw ConfigError("subsample removed every sample");

  SyntheticDataset out = ds;
  out.train = ds.train.gather(keep);
  return out;
}

double ToyLandscape::f1(std::array<double, 2> x) const {
  return (x[0] - 1.0) * (x[0] - 1.0) + 0.25 * (x[1] - 1.0) * (x[1] - 1.0);
}

double ToyLandscape::f2(std::array<double, 2> x) const {
  return beta *
         ((x[0] + 1.0) * (x[0] + 1.0) + 0.25 * (x[1] + 1.0) * (x[1] + 1.0));
}

std::array<double, 2> ToyLandscape::grad_f1(std::array<double, 2> x) const {
  return {2.0 * (x[0] - 1.0), 0.5 * (x[1] - 1.0)};
}

std::array<double, 2> ToyLandscape::grad_f2(std::array<double, 2> x) const {
  return {beta * 2.0 * (x[0] + 1.0), beta * 0.5 * (x[1] + 1.0)};
}

ToyLandscape gen_toy_landscape(double beta) {
  if (beta <= 0.0) throw ConfigError("toy landscape beta must be positive");
  return ToyLandscape{beta};
}

}  // namespace gradbalance::problems
