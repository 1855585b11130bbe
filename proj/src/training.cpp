#include "gradbalance/training.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "gradbalance/errors.hpp"
#include "gradbalance/kernels.hpp"
#include "gradbalance/optim.hpp"

namespace gradbalance::problems {

namespace {

std::string divergence_snapshot(long step, const GradientSet& gs,
                                const CombineResult* last,
                                const combiners::Combiner& combiner) {
  std::ostringstream out;
  out << "{\"step\":" << step << ",\"combiner\":\"" << combiner.id()
      << "\",\"losses\":[";
  for (std::size_t t = 0; t < gs.losses.size(); ++t)
    out << (t ? "," : "") << gs.losses[t];
  out << "],\"weights\":[";
  if (last)
    for (std::size_t t = 0; t < last->weights.size(); ++t)
      out << (t ? "," : "") << last->weights[t];
  out << "],\"state\":{";
  bool first = true;
  for (const auto& [name, vec] : combiner.state_snapshot()) {
    out << (first ? "" : ",") << '"' << name << "\":[";
    for (std::size_t i = 0; i < vec.size(); ++i) out << (i ? "," : "") << vec[i];
    out << ']';
    first = false;
  }
  out << "}}";
  return out.str();
}

struct ParamSnapshot {
  std::vector<double> shared;
  std::vector<std::vector<double>> heads;

  static ParamSnapshot take(const MtlModel& m) {
    ParamSnapshot s;
    auto phi = m.shared_params();
    s.shared.assign(phi.begin(), phi.end());
    for (std::size_t t = 0; t < m.task_count(); ++t) {
      auto psi = m.head_params(t);
      s.heads.emplace_back(psi.begin(), psi.end());
    }
    return s;
  }
  void restore(MtlModel& m) const {
    std::copy(shared.begin(), shared.end(), m.shared_params().begin());
    for (std::size_t t = 0; t < heads.size(); ++t)
      std::copy(heads[t].begin(), heads[t].end(), m.head_params(t).begin());
  }
};

double signed_metric(double value, bool lower_is_better) {
  return lower_is_better ? -value : value;
}

}  // namespace

std::vector<MtlModel::TaskLossSpec> loss_specs(
    const std::vector<TaskSpec>& tasks) {
  std::vector<MtlModel::TaskLossSpec> specs;
  for (const TaskSpec& t : tasks) {
    MtlModel::TaskLossSpec s;
    s.kind = t.loss_kind();
    s.scale = t.scale;
    specs.push_back(s);
  }
  return specs;
}

MlpConfig make_mlp_config(const ModelConfig& cfg, const SyntheticDataset& ds) {
  MlpConfig mc;
  mc.input_dim = ds.spec.input_dim;
  mc.hidden = cfg.hidden;
  mc.activation = cfg.activation;
  mc.init_range = cfg.init_range;
  for (const TaskSpec& t : ds.tasks) mc.head_dims.push_back(t.output_dim);
  return mc;
}

std::vector<double> evaluate(const MtlModel& model, const Batch& split,
                             const std::vector<TaskSpec>& tasks) {
  const auto cache = model.forward(split);
  std::vector<double> out;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const TaskSpec& ts = tasks[t];
    out.push_back(metrics::metric_value(
        ts.metric, cache.logits[t], split.targets[t].values,
        split.targets[t].labels, split.n, ts.output_dim));
  }
  return out;
}

TrainOutcome train_mtl(const ModelConfig& model_cfg,
                       const SyntheticDataset& ds,
                       combiners::Combiner& combiner, const TrainConfig& cfg,
                       std::uint64_t seed,
                       const metrics::BaselineTable* val_baseline) {
  const std::size_t tasks = ds.tasks.size();
  if (val_baseline && val_baseline->entries.size() != tasks)
    throw ConfigError("validation baseline task count mismatch");

  Rng init_rng(seed, streams::kModelInit);
  TrainOutcome out{MtlModel(make_mlp_config(model_cfg, ds), init_rng)};
  MtlModel& model = out.model;
  out.trace = diag::Trace(combiner.id(), seed);

  Rng batch_rng(seed, streams::kBatchSampling);
  const auto specs = loss_specs(ds.tasks);
  const bool full_batch =
      cfg.batch_size == 0 || cfg.batch_size >= ds.train.n;

  const bool use_adam = cfg.optimizer == "adam";
  if (!use_adam && cfg.optimizer != "sgd")
    throw ConfigError("unknown optimizer: " + cfg.optimizer);
  const bool poly = cfg.lr_schedule == "poly";
  if (!poly && cfg.lr_schedule != "const")
    throw ConfigError("unknown lr_schedule: " + cfg.lr_schedule);
  AdamState shared_adam(model.shared_dim());
  std::vector<AdamState> head_adam;
  for (std::size_t t = 0; t < tasks; ++t)
    head_adam.emplace_back(model.head_param_count(t));

  const bool select =
      cfg.best_val_select && cfg.eval_stride > 0 &&
      (val_baseline != nullptr || tasks == 1);
  ParamSnapshot best;
  double best_score = -std::numeric_limits<double>::infinity();

  auto val_score = [&]() {
    const std::vector<double> vals = evaluate(model, ds.val, ds.tasks);
    if (val_baseline) return metrics::delta_m(vals, *val_baseline).value_pct;
    return signed_metric(vals[0], ds.tasks[0].lower_is_better);
  };

  std::vector<std::size_t> idx(full_batch ? 0 : cfg.batch_size);
  GradientSet gs(tasks, model.shared_dim());
  const ParamSpan scope = model.last_shared_span();
  gs.scope_begin = scope.begin;
  gs.scope_end = scope.end;
  std::vector<double> head_dir;

  for (long step = 0; step < cfg.steps; ++step) {
    Batch minibatch;
    const Batch* batch = &ds.train;
    if (!full_batch) {
      for (std::size_t& i : idx) i = batch_rng.below(ds.train.n);
      minibatch = ds.train.gather(idx);
      batch = &minibatch;
    }

    const auto cache = model.forward(*batch);
    const auto bw = model.backward_per_task(*batch, cache, specs);

    gs.step = step;
    gs.losses = bw.losses;
    for (std::size_t t = 0; t < tasks; ++t)
      std::memcpy(gs.row(t).data(), bw.shared_grads[t].data(),
                  sizeof(double) * gs.dim);

    for (std::size_t t = 0; t < tasks; ++t) {
      if (!std::isfinite(bw.losses[t]) ||
          bw.losses[t] > cfg.divergence_threshold) {
        throw DivergenceError(
            "training diverged at step " + std::to_string(step),
            divergence_snapshot(step, gs, nullptr, combiner));
      }
    }

    CombineResult res;
    try {
      res = combiner.combine(gs);
    } catch (const NumericError& e) {
      throw DivergenceError(
          std::string("combiner failed at step ") + std::to_string(step) +
              ": " + e.what(),
          divergence_snapshot(step, gs, nullptr, combiner));
    }

    if (cfg.trace_stride > 0 && step % cfg.trace_stride == 0) {
      diag::TraceRecord rec;
      rec.step = step;
      rec.loss = bw.losses;
      rec.weight =
          res.has_weights() ? res.weights : std::vector<double>(tasks, 1.0);
      rec.grad_norm = diag::grad_norms(gs, Scope::kLastShared);
      rec.cos_to_agg =
          diag::cos_to_aggregate(gs, res.direction, Scope::kLastShared).values;
      rec.pair_cos = diag::pairwise_cosine(gs, Scope::kLastShared);
      rec.pair_dot = diag::pairwise_dot(gs, Scope::kLastShared);
      out.trace.record_step(std::move(rec));
    }

    const double lr =
        poly ? cfg.lr * std::pow(1.0 - double(step) / double(cfg.steps), 0.9)
             : cfg.lr;
    if (use_adam) {
      adam_step(shared_adam, model.shared_params(), res.direction, lr);
    } else {
      sgd_step(model.shared_params(), res.direction, lr);
    }
    for (std::size_t t = 0; t < tasks; ++t) {
      const double w = res.has_weights() ? res.weights[t] : 1.0;
      head_dir = bw.head_grads[t];
      if (w != 1.0) kernels::scal(w, head_dir.data(), head_dir.size());
      if (use_adam) {
        adam_step(head_adam[t], model.head_params(t), head_dir, lr);
      } else {
        sgd_step(model.head_params(t), head_dir, lr);
      }
    }

    if (combiner.wants_post_step_losses()) {
      const auto cache2 = model.forward(*batch);
      const auto bw2 = model.backward_per_task(*batch, cache2, specs);
      combiner.post_step_losses(bw2.losses);
    }

    out.final_losses = bw.losses;
    out.steps_run = step + 1;

    if (select && ((step + 1) % cfg.eval_stride == 0 || step + 1 == cfg.steps)) {
      const double score = val_score();
      if (score > best_score) {
        best_score = score;
        best = ParamSnapshot::take(model);
        out.best_step = step + 1;
      }
    }
  }

  if (select && out.best_step >= 0) {
    best.restore(model);
    out.best_val_score = best_score;
  }
  return out;
}

TrainOutcome train_stl(const ModelConfig& model_cfg,
                       const SyntheticDataset& ds, std::size_t task,
                       const TrainConfig& cfg, std::uint64_t seed) {
  const SyntheticDataset single = restrict_to_task(ds, task);
  const auto combiner =
      combiners::make_combiner(combiners::CombinerConfig{}, 1);
  return train_mtl(model_cfg, single, *combiner, cfg, seed);
}

}  // namespace gradbalance::problems
