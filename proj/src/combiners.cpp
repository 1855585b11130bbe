#include "gradbalance/combiners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gradbalance/errors.hpp"
#include "gradbalance/kernels.hpp"

namespace gradbalance::combiners {

namespace {

std::vector<double> softmax(std::span<const double> z) {
  double zmax = -std::numeric_limits<double>::infinity();
  for (double v : z) zmax = std::max(zmax, v);
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - zmax);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

// K = G G^T over the full gradients
std::vector<double> gram(const GradientSet& gs) {
  std::vector<double> k(gs.tasks * gs.tasks);
  for (std::size_t i = 0; i < gs.tasks; ++i) {
    for (std::size_t j = i; j < gs.tasks; ++j) {
      const double v = kernels::dot(gs.row(i).data(), gs.row(j).data(), gs.dim);
      k[i * gs.tasks + j] = v;
      k[j * gs.tasks + i] = v;
    }
  }
  return k;
}

CombineResult from_weights(const GradientSet& gs, std::vector<double> w) {
  CombineResult r;
  r.direction = weighted_sum(gs, w);
  r.weights = std::move(w);
  return r;
}

}  // namespace

CombineResult combine_uniform(const GradientSet& gs) {
  gs.validate();
  return from_weights(gs, std::vector<double>(gs.tasks, 1.0));
}

CombineResult combine_fixed(const GradientSet& gs,
                            std::span<const double> weights) {
  gs.validate();
  if (weights.size() != gs.tasks)
    throw ConfigError("fixed weights length does not match task count");
  for (double w : weights)
    if (w < 0.0) throw ConfigError("fixed weights must be non-negative");
  return from_weights(gs, std::vector<double>(weights.begin(), weights.end()));
}

CombineResult avgnorm_weights(const GradientSet& gs, Scope scope,
                              double eps_norm) {
  gs.validate();
  const std::size_t scoped_len = gs.scoped_row(0, scope).size();
  std::vector<double> sum(scoped_len, 0.0);
  std::vector<double> norms(gs.tasks);
  for (std::size_t t = 0; t < gs.tasks; ++t) {
    auto g = gs.scoped_row(t, scope);
    norms[t] = kernels::nrm2(g.data(), g.size());
    if (norms[t] <= eps_norm)
      throw DegenerateGradientError(
          "avgnorm: scoped gradient norm of task " + std::to_string(t) +
              " is below eps_norm",
          static_cast<int>(t));
    kernels::axpy(1.0, g.data(), sum.data(), scoped_len);
  }
  const double overall = kernels::nrm2(sum.data(), sum.size());
  std::vector<double> w(gs.tasks);
  for (std::size_t t = 0; t < gs.tasks; ++t) w[t] = overall / norms[t];
  CombineResult r = from_weights(gs, std::move(w));
  r.aux["overall_norm"] = overall;
  return r;
}

CombineResult uw_step(const GradientSet& gs, UwState& state) {
  gs.validate();
  if (state.log_vars.empty()) state.log_vars.assign(gs.tasks, 0.0);
  std::vector<double> w(gs.tasks);
  for (std::size_t t = 0; t < gs.tasks; ++t)
    w[t] = 0.5 * std::exp(-state.log_vars[t]);
  CombineResult r = from_weights(gs, std::move(w));
  // descend 1/2 sum exp(-s_i) L_i + s_i/2 in s
  for (std::size_t t = 0; t < gs.tasks; ++t) {
    const double grad =
        0.5 - 0.5 * std::exp(-state.log_vars[t]) * gs.losses[t];
    state.log_vars[t] -= state.inner_lr * grad;
  }
  return r;
}

CombineResult gradnorm_step(const GradientSet& gs, GradNormState& state) {
  gs.validate();
  if (!state.initialized) {
    for (std::size_t t = 0; t < gs.tasks; ++t)
      if (gs.losses[t] <= 0.0)
        throw NumericError("gradnorm: initial loss must be positive",
                           static_cast<int>(t));
    state.initial_losses = gs.losses;
    state.weights.assign(gs.tasks, 1.0);
    state.initialized = true;
  }

  std::vector<double> scoped_norm(gs.tasks), g_scaled(gs.tasks),
      ratio(gs.tasks);
  double mean_scaled = 0.0, mean_ratio = 0.0;
  for (std::size_t t = 0; t < gs.tasks; ++t) {
    auto g = gs.scoped_row(t, Scope::kLastShared);
    scoped_norm[t] = kernels::nrm2(g.data(), g.size());
    g_scaled[t] = std::abs(state.weights[t]) * scoped_norm[t];
    ratio[t] = gs.losses[t] / state.initial_losses[t];
    mean_scaled += g_scaled[t];
    mean_ratio += ratio[t];
  }
  mean_scaled /= double(gs.tasks);
  mean_ratio /= double(gs.tasks);

  for (std::size_t t = 0; t < gs.tasks; ++t) {
    const double rel = mean_ratio > 1e-300 ? ratio[t] / mean_ratio : 1.0;
    const double target = mean_scaled * std::pow(rel, state.exponent);
    const double diff = g_scaled[t] - target;
    const double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    state.weights[t] -= state.inner_lr * sign;
  }
  const double total =
      std::accumulate(state.weights.begin(), state.weights.end(), 0.0);
  if (total <= 0.0)
    throw NumericError("gradnorm: weight sum collapsed to zero");
  const double renorm = double(gs.tasks) / total;
  for (double& w : state.weights) w *= renorm;

  return from_weights(gs, state.weights);
}

CombineResult dwa_weights(const GradientSet& gs, DwaState& state) {
  gs.validate();
  std::vector<double> w(gs.tasks, 1.0);
  if (state.calls >= 2) {
    std::vector<double> r(gs.tasks);
    for (std::size_t t = 0; t < gs.tasks; ++t)
      r[t] = state.prev[t] / std::max(state.prev2[t], 1e-12);
    for (double& v : r) v /= state.temperature;
    const std::vector<double> p = softmax(r);
    for (std::size_t t = 0; t < gs.tasks; ++t) w[t] = double(gs.tasks) * p[t];
  }
  state.prev2 = state.prev;
  state.prev = gs.losses;
  state.calls += 1;
  return from_weights(gs, std::move(w));
}

CombineResult rlw_weights(const GradientSet& gs, Rng& rng) {
  gs.validate();
  std::vector<double> z(gs.tasks);
  for (double& v : z) v = rng.normal();
  return from_weights(gs, softmax(z));
}

CombineResult famo_weights(const GradientSet& gs, const FamoState& state) {
  gs.validate();
  if (state.logits.size() != gs.tasks)
    throw ConfigError("famo logits not initialized for this task count");
  for (std::size_t t = 0; t < gs.tasks; ++t)
    if (gs.losses[t] <= 0.0)
      throw NumericError("famo: losses must be positive", static_cast<int>(t));
  const std::vector<double> z = softmax(state.logits);
  double denom = 0.0;
  for (std::size_t t = 0; t < gs.tasks; ++t) denom += z[t] / gs.losses[t];
  const double c = 1.0 / denom;
  std::vector<double> w(gs.tasks);
  for (std::size_t t = 0; t < gs.tasks; ++t) w[t] = c * z[t] / gs.losses[t];
  CombineResult r = from_weights(gs, std::move(w));
  r.aux["c"] = c;
  return r;
}

void famo_update(FamoState& state, std::span<const double> losses_before,
                 std::span<const double> losses_after) {
  const std::size_t n = state.logits.size();
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) {
    if (losses_before[t] <= 0.0 || losses_after[t] <= 0.0)
      throw NumericError("famo: losses must stay positive",
                         static_cast<int>(t));
    delta[t] = std::log(losses_before[t]) - std::log(losses_after[t]);
  }
  const std::vector<double> z = softmax(state.logits);
  double zdot = 0.0;
  for (std::size_t t = 0; t < n; ++t) zdot += z[t] * delta[t];
  for (std::size_t t = 0; t < n; ++t) {
    const double grad = z[t] * (delta[t] - zdot);  // J_softmax^T delta
    state.logits[t] -=
        state.inner_lr * grad + state.inner_lr * state.decay * state.logits[t];
  }
}

CombineResult famo_step(const GradientSet& gs, FamoState& state,
                        std::span<const double> next_losses) {
  if (state.logits.size() != gs.tasks) state.logits.assign(gs.tasks, 0.0);
  CombineResult r = famo_weights(gs, state);
  famo_update(state, gs.losses, next_losses);
  return r;
}

CombineResult pcgrad_combine(const GradientSet& gs, Rng& rng) {
  gs.validate();
  CombineResult r;
  r.direction.assign(gs.dim, 0.0);
  std::vector<double> proj(gs.dim);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < gs.tasks; ++i) {
    auto gi = gs.row(i);
    std::copy(gi.begin(), gi.end(), proj.begin());
    order.clear();
    for (std::size_t j = 0; j < gs.tasks; ++j)
      if (j != i) order.push_back(j);
    rng.shuffle(order);
    for (std::size_t j : order) {
      auto gj = gs.row(j);
      const double nj2 = kernels::nrm2sq(gj.data(), gs.dim);
      if (nj2 <= 0.0) continue;
      const double d = kernels::dot(proj.data(), gj.data(), gs.dim);
      if (d < 0.0) kernels::axpy(-d / nj2, gj.data(), proj.data(), gs.dim);
    }
    kernels::axpy(1.0, proj.data(), r.direction.data(), gs.dim);
  }
  return r;
}

CombineResult cagrad_combine(const GradientSet& gs, double c,
                             const SolverOptions& opts) {
  gs.validate();
  if (c < 0.0) throw ConfigError("cagrad: c must be >= 0");
  const std::size_t T = gs.tasks;

  const std::vector<double> mean_w(T, 1.0 / double(T));
  std::vector<double> g0 = weighted_sum(gs, mean_w);
  const double g0_sq = kernels::nrm2sq(g0.data(), g0.size());
  const double sqrt_phi = c * std::sqrt(g0_sq);

  const std::vector<double> k = gram(gs);
  std::vector<double> b(T);  // b_i = g_i . g0
  for (std::size_t i = 0; i < T; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < T; ++j) acc += k[i * T + j];
    b[i] = acc / double(T);
  }

  auto kw_of = [&](const std::vector<double>& w) {
    std::vector<double> kw(T, 0.0);
    for (std::size_t i = 0; i < T; ++i)
      for (std::size_t j = 0; j < T; ++j) kw[i] += k[i * T + j] * w[j];
    return kw;
  };
  auto objective = [&](const std::vector<double>& w,
                       const std::vector<double>& kw) {
    double wb = 0.0, wkw = 0.0;
    for (std::size_t i = 0; i < T; ++i) {
      wb += w[i] * b[i];
      wkw += w[i] * kw[i];
    }
    return wb + sqrt_phi * std::sqrt(std::max(wkw, 0.0));
  };

  // projected gradient with a monotone backtracking step on the convex
  // objective w . b + sqrt(phi) ||G^T w||
  std::vector<double> w(T, 1.0 / double(T));
  std::vector<double> kw = kw_of(w);
  double fw = objective(w, kw);
  double kmax = 0.0;
  for (std::size_t i = 0; i < T; ++i) kmax = std::max(kmax, k[i * T + i]);
  double lr = 1.0 / (kmax + 1e-12);
  bool converged = (T == 1);
  int iters = 0;
  for (; iters < opts.max_iter && !converged; ++iters) {
    double gw_norm = 0.0;
    for (std::size_t i = 0; i < T; ++i) gw_norm += w[i] * kw[i];
    gw_norm = std::sqrt(std::max(gw_norm, 0.0));
    std::vector<double> grad(T);
    for (std::size_t i = 0; i < T; ++i) {
      grad[i] = b[i];
      if (gw_norm > 1e-300) grad[i] += sqrt_phi * kw[i] / gw_norm;
    }
    bool improved = false;
    std::vector<double> w2, kw2;
    double f2 = fw;
    for (int halving = 0; halving < 40; ++halving) {
      std::vector<double> cand(T);
      for (std::size_t i = 0; i < T; ++i) cand[i] = w[i] - lr * grad[i];
      cand = simplex_project(cand);
      std::vector<double> kwc = kw_of(cand);
      const double fc = objective(cand, kwc);
      if (fc < fw) {
        w2 = std::move(cand);
        kw2 = std::move(kwc);
        f2 = fc;
        improved = true;
        break;
      }
      lr *= 0.5;
    }
    if (!improved) {
      converged = true;  // no descent direction left at this scale
      break;
    }
    const double drop = fw - f2;
    w = std::move(w2);
    kw = std::move(kw2);
    fw = f2;
    lr *= 1.5;
    if (drop <= opts.tol * std::max(1.0, std::abs(fw))) {
      converged = true;
      break;
    }
  }

  std::vector<double> gw = weighted_sum(gs, w);
  const double gw_norm = kernels::nrm2(gw.data(), gw.size());
  CombineResult r;
  r.direction = g0;
  if (gw_norm > kEpsNorm) {
    kernels::axpy(sqrt_phi / gw_norm, gw.data(), r.direction.data(), gs.dim);
  }
  std::vector<double> diff(gs.dim);
  for (std::size_t i = 0; i < gs.dim; ++i) diff[i] = r.direction[i] - g0[i];
  r.aux["objective"] = fw;
  r.aux["dist_to_mean"] = kernels::nrm2(diff.data(), diff.size());
  r.aux["iterations"] = double(iters);
  if (!converged) r.aux["warning"] = 1.0;
  return r;
}

CombineResult graddrop_combine(const GradientSet& gs, Rng& rng) {
  gs.validate();
  CombineResult r;
  r.direction.assign(gs.dim, 0.0);
  for (std::size_t p = 0; p < gs.dim; ++p) {
    double sum = 0.0, abs_sum = 0.0;
    for (std::size_t t = 0; t < gs.tasks; ++t) {
      const double v = gs.grads[t * gs.dim + p];
      sum += v;
      abs_sum += std::abs(v);
    }
    const double purity = abs_sum > 0.0 ? 0.5 * (1.0 + sum / abs_sum) : 0.5;
    const bool keep_positive = rng.uniform() < purity;
    double kept = 0.0;
    for (std::size_t t = 0; t < gs.tasks; ++t) {
      const double v = gs.grads[t * gs.dim + p];
      if (keep_positive ? v > 0.0 : v < 0.0) kept += v;
    }
    r.direction[p] = kept;
  }
  return r;
}

CombineResult bargain_weights(const GradientSet& gs, double exponent,
                              double damping, const SolverOptions& opts) {
  gs.validate();
  const std::size_t T = gs.tasks;
  const std::vector<double> k = gram(gs);
  for (std::size_t i = 0; i < T; ++i)
    if (k[i * T + i] <= 0.0)
      throw DegenerateGradientError(
          "bargaining: task " + std::to_string(i) + " has zero gradient",
          static_cast<int>(i));

  std::vector<double> w(T, 1.0), kw(T), best_w;
  double best_res = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iters = 0;
  for (; iters <= opts.max_iter; ++iters) {
    for (std::size_t i = 0; i < T; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < T; ++j) acc += k[i * T + j] * w[j];
      kw[i] = acc;
      if (kw[i] <= 0.0)
        throw DegenerateGradientError(
            "bargaining: gradient set too adversarial ((Kw)_" +
                std::to_string(i) + " <= 0)",
            static_cast<int>(i));
    }
    double res = 0.0;
    for (std::size_t i = 0; i < T; ++i)
      res = std::max(res, std::abs(w[i] * std::pow(kw[i], exponent) - 1.0));
    if (res < best_res) {
      best_res = res;
      best_w = w;
    }
    if (res <= opts.tol) {
      converged = true;
      break;
    }
    for (std::size_t i = 0; i < T; ++i) {
      const double fp = std::pow(kw[i], -exponent);
      w[i] = (1.0 - damping) * w[i] + damping * fp;
      w[i] = std::clamp(w[i], 1e-8, 1e8);
    }
  }

  CombineResult r = from_weights(gs, best_w);
  r.aux["residual"] = best_res;
  r.aux["iterations"] = double(iters);
  if (!converged) r.aux["warning"] = 1.0;
  return r;
}

std::vector<double> simplex_project(std::span<const double> v) {
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumsum += u[i];
    const double t = (1.0 - cumsum) / double(i + 1);
    if (u[i] + t > 0.0) theta = t;
  }
  std::vector<double> w(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    w[i] = std::max(v[i] + theta, 0.0);
  return w;
}

double min_norm_gamma(std::span<const double> g1, std::span<const double> g2) {
  double den = 0.0, num = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    const double d = g1[i] - g2[i];
    den += d * d;
    num += g2[i] * (g2[i] - g1[i]);
  }
  if (den <= 0.0) return 0.5;
  return std::clamp(num / den, 0.0, 1.0);
}

CombineResult mgda_weights(const GradientSet& gs, int max_iter, double tol) {
  gs.validate();
  const std::size_t T = gs.tasks;
  std::vector<double> w(T, 1.0 / double(T));
  std::vector<double> d = weighted_sum(gs, w);
  double gap = 0.0;
  int iters = 0;
  if (T > 1) {
    for (; iters < max_iter; ++iters) {
      std::size_t t_hat = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < T; ++t) {
        const double dt = kernels::dot(gs.row(t).data(), d.data(), gs.dim);
        if (dt < best) {
          best = dt;
          t_hat = t;
        }
      }
      gap = kernels::nrm2sq(d.data(), d.size()) - best;
      if (gap <= tol) break;
      const double gamma = min_norm_gamma(d, gs.row(t_hat));
      for (double& wi : w) wi *= gamma;
      w[t_hat] += 1.0 - gamma;
      const auto gt = gs.row(t_hat);
      for (std::size_t p = 0; p < gs.dim; ++p)
        d[p] = gamma * d[p] + (1.0 - gamma) * gt[p];
    }
  }
  CombineResult r = from_weights(gs, std::move(w));
  r.aux["iterations"] = double(iters);
  r.aux["fw_gap"] = gap;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

class UniformCombiner final : public Combiner {
 public:
  UniformCombiner() : Combiner("uniform") {}
  CombineResult combine(const GradientSet& gs) override {
    return combine_uniform(gs);
  }
};

class FixedCombiner final : public Combiner {
 public:
  explicit FixedCombiner(std::vector<double> w)
      : Combiner("fixed"), w_(std::move(w)) {}
  CombineResult combine(const GradientSet& gs) override {
    return combine_fixed(gs, w_);
  }

 private:
  std::vector<double> w_;
};

class AvgNormCombiner final : public Combiner {
 public:
  AvgNormCombiner(Scope scope, double eps)
      : Combiner("avgnorm"), scope_(scope), eps_(eps) {}
  CombineResult combine(const GradientSet& gs) override {
    return avgnorm_weights(gs, scope_, eps_);
  }

 private:
  Scope scope_;
  double eps_;
};

class UwCombiner final : public Combiner {
 public:
  explicit UwCombiner(double lr) : Combiner("uw") { state_.inner_lr = lr; }
  CombineResult combine(const GradientSet& gs) override {
    return uw_step(gs, state_);
  }
  std::map<std::string, std::vector<double>> state_snapshot() const override {
    return {{"log_vars", state_.log_vars}};
  }

 private:
  UwState state_;
};

class GradNormCombiner final : public Combiner {
 public:
  GradNormCombiner(double exponent, double lr) : Combiner("gradnorm") {
    state_.exponent = exponent;
    state_.inner_lr = lr;
  }
  CombineResult combine(const GradientSet& gs) override {
    return gradnorm_step(gs, state_);
  }
  std::map<std::string, std::vector<double>> state_snapshot() const override {
    return {{"weights", state_.weights},
            {"initial_losses", state_.initial_losses}};
  }

 private:
  GradNormState state_;
};

class DwaCombiner final : public Combiner {
 public:
  explicit DwaCombiner(double temp) : Combiner("dwa") {
    state_.temperature = temp;
  }
  CombineResult combine(const GradientSet& gs) override {
    return dwa_weights(gs, state_);
  }
  std::map<std::string, std::vector<double>> state_snapshot() const override {
    return {{"prev", state_.prev}, {"prev2", state_.prev2}};
  }

 private:
  DwaState state_;
};

class RlwCombiner final : public Combiner {
 public:
  explicit RlwCombiner(std::uint64_t seed)
      : Combiner("rlw"), rng_(seed, streams::kCombiner) {}
  CombineResult combine(const GradientSet& gs) override {
    return rlw_weights(gs, rng_);
  }

 private:
  Rng rng_;
};

class FamoCombiner final : public Combiner {
 public:
  FamoCombiner(double lr, double decay) : Combiner("famo") {
    state_.inner_lr = lr;
    state_.decay = decay;
  }
  CombineResult combine(const GradientSet& gs) override {
    if (state_.logits.size() != gs.tasks) state_.logits.assign(gs.tasks, 0.0);
    pending_losses_ = gs.losses;
    return famo_weights(gs, state_);
  }
  bool wants_post_step_losses() const override { return true; }
  void post_step_losses(std::span<const double> losses) override {
    if (pending_losses_.empty()) return;
    famo_update(state_, pending_losses_, losses);
    pending_losses_.clear();
  }
  std::map<std::string, std::vector<double>> state_snapshot() const override {
    return {{"logits", state_.logits}};
  }

 private:
  FamoState state_;
  std::vector<double> pending_losses_;
};

class PcGradCombiner final : public Combiner {
 public:
  explicit PcGradCombiner(std::uint64_t seed)
      : Combiner("pcgrad"), rng_(seed, streams::kCombiner) {}
  CombineResult combine(const GradientSet& gs) override {
    return pcgrad_combine(gs, rng_);
  }

 private:
  Rng rng_;
};

class CagradCombiner final : public Combiner {
 public:
  CagradCombiner(double c, SolverOptions opts)
      : Combiner("cagrad"), c_(c), opts_(opts) {}
  CombineResult combine(const GradientSet& gs) override {
    return cagrad_combine(gs, c_, opts_);
  }

 private:
  double c_;
  SolverOptions opts_;
};

class GradDropCombiner final : public Combiner {
 public:
  explicit GradDropCombiner(std::uint64_t seed)
      : Combiner("graddrop"), rng_(seed, streams::kCombiner) {}
  CombineResult combine(const GradientSet& gs) override {
    return graddrop_combine(gs, rng_);
  }

 private:
  Rng rng_;
};

class BargainCombiner final : public Combiner {
 public:
  BargainCombiner(std::string id, double exponent, double damping,
                  SolverOptions opts)
      : Combiner(std::move(id)),
        exponent_(exponent),
        damping_(damping),
        opts_(opts) {}
  CombineResult combine(const GradientSet& gs) override {
    return bargain_weights(gs, exponent_, damping_, opts_);
  }

 private:
  double exponent_;
  double damping_;
  SolverOptions opts_;
};

class MgdaCombiner final : public Combiner {
 public:
  explicit MgdaCombiner(SolverOptions opts) : Combiner("mgda"), opts_(opts) {}
  CombineResult combine(const GradientSet& gs) override {
    return mgda_weights(gs, opts_.max_iter, opts_.tol);
  }

 private:
  SolverOptions opts_;
};

}  // namespace

std::unique_ptr<Combiner> make_combiner(const CombinerConfig& cfg,
                                        std::size_t tasks) {
  const std::string& id = cfg.id;
  if (id == "uniform") return std::make_unique<UniformCombiner>();
  if (id == "fixed") {
    std::vector<double> w = cfg.fixed_weights;
    if (w.empty()) w.assign(tasks, 1.0);
    if (w.size() != tasks)
      throw ConfigError("fixed_weights length does not match task count");
    for (double v : w)
      if (v < 0.0) throw ConfigError("fixed_weights must be non-negative");
    return std::make_unique<FixedCombiner>(std::move(w));
  }
  if (id == "avgnorm")
    return std::make_unique<AvgNormCombiner>(cfg.avgnorm_scope, cfg.eps_norm);
  if (id == "uw") return std::make_unique<UwCombiner>(cfg.uw_inner_lr);
  if (id == "gradnorm")
    return std::make_unique<GradNormCombiner>(cfg.gradnorm_exponent,
                                              cfg.gradnorm_inner_lr);
  if (id == "dwa") return std::make_unique<DwaCombiner>(cfg.dwa_temperature);
  if (id == "rlw") return std::make_unique<RlwCombiner>(cfg.seed);
  if (id == "famo")
    return std::make_unique<FamoCombiner>(cfg.famo_inner_lr, cfg.famo_decay);
  if (id == "mgda") return std::make_unique<MgdaCombiner>(cfg.solver);
  if (id == "pcgrad") return std::make_unique<PcGradCombiner>(cfg.seed);
  if (id == "cagrad")
    return std::make_unique<CagradCombiner>(cfg.cagrad_c, cfg.solver);
  if (id == "graddrop") return std::make_unique<GradDropCombiner>(cfg.seed);
  if (id == "nash")
    return std::make_unique<BargainCombiner>("nash", 1.0, cfg.bargain_damping,
                                             cfg.solver);
  if (id == "fairgrad")
    return std::make_unique<BargainCombiner>("fairgrad", cfg.fairgrad_exponent,
                                             cfg.bargain_damping, cfg.solver);
  throw ConfigError("unknown combiner id: " + id);
}

const std::vector<std::string>& combiner_ids() {
  static const std::vector<std::string> ids{
      "uniform", "fixed",  "avgnorm", "uw",     "gradnorm",
      "dwa",     "rlw",    "famo",    "mgda",   "pcgrad",
      "cagrad",  "graddrop", "nash",  "fairgrad"};
  return ids;
}

}  // namespace gradbalance::combiners
