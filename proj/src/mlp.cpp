#include "gradbalance/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "gradbalance/errors.hpp"
#include "gradbalance/kernels.hpp"

namespace gradbalance {

namespace {

void apply_activation(Activation act, std::vector<double>& z) {
  switch (act) {
    case Activation::kTanh:
      for (double& v : z) v = std::tanh(v);
      break;
    case Activation::kRelu:
      for (double& v : z) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::kIdentity:
      break;
  }
}

// delta *= act'(z), where a = act(z) is the stored activation
void apply_activation_grad(Activation act, const std::vector<double>& a,
                           std::vector<double>& delta) {
  switch (act) {
    case Activation::kTanh:
      for (std::size_t i = 0; i < delta.size(); ++i)
        delta[i] *= 1.0 - a[i] * a[i];
      break;
    case Activation::kRelu:
      for (std::size_t i = 0; i < delta.size(); ++i)
        if (a[i] <= 0.0) delta[i] = 0.0;
      break;
    case Activation::kIdentity:
      break;
  }
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  if (s == "identity") return Activation::kIdentity;
  throw ConfigError("unknown activation: " + s);
}

Batch Batch::gather(std::span<const std::size_t> idx) const {
  Batch out;
  out.n = idx.size();
  out.input_dim = input_dim;
  out.inputs.resize(out.n * input_dim);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::memcpy(out.inputs.data() + r * input_dim,
                inputs.data() + idx[r] * input_dim,
                sizeof(double) * input_dim);
  }
  out.targets.resize(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const TaskTargets& src = targets[t];
    TaskTargets& dst = out.targets[t];
    if (!src.labels.empty()) {
      dst.labels.resize(out.n);
      for (std::size_t r = 0; r < idx.size(); ++r)
        dst.labels[r] = src.labels[idx[r]];
    }
    if (!src.values.empty()) {
      const std::size_t dim = src.values.size() / n;
      dst.values.resize(out.n * dim);
      for (std::size_t r = 0; r < idx.size(); ++r)
        std::memcpy(dst.values.data() + r * dim, src.values.data() + idx[r] * dim,
                    sizeof(double) * dim);
    }
  }
  if (!group_ids.empty()) {
    out.group_ids.resize(out.n);
    for (std::size_t r = 0; r < idx.size(); ++r)
      out.group_ids[r] = group_ids[idx[r]];
  }
  return out;
}

MtlModel::MtlModel(const MlpConfig& cfg, Rng& init_rng) : cfg_(cfg) {
  if (cfg.input_dim == 0) throw ConfigError("model input_dim must be > 0");
  if (cfg.head_dims.empty()) throw ConfigError("model needs at least one head");

  std::size_t offset = 0;
  std::size_t in = cfg.input_dim;
  for (std::size_t width : cfg.hidden) {
    LayerView lv;
    lv.in = in;
    lv.out = width;
    lv.w = offset;
    lv.b = offset + width * in;
    offset = lv.b + width;
    layers_.push_back(lv);
    in = width;
  }
  if (layers_.empty()) throw ConfigError("model needs at least one shared layer");
  phi_.resize(offset);
  last_shared_ = {layers_.back().w, offset};

  for (const LayerView& lv : layers_) {
    const double r =
        cfg.init_range > 0.0 ? cfg.init_range : 1.0 / std::sqrt(double(lv.in));
    for (std::size_t i = 0; i < lv.out * lv.in; ++i)
      phi_[lv.w + i] = init_rng.uniform(-r, r);
    // biases start at zero
  }

  for (std::size_t dim : cfg.head_dims) {
    Head h;
    h.in = in;
    h.out = dim;
    heads_.push_back(h);
    std::vector<double> p(dim * in + dim, 0.0);
    const double r =
        cfg.init_range > 0.0 ? cfg.init_range : 1.0 / std::sqrt(double(in));
    for (std::size_t i = 0; i < dim * in; ++i) p[i] = init_rng.uniform(-r, r);
    psi_.push_back(std::move(p));
  }
}

std::size_t MtlModel::feature_dim() const { return layers_.back().out; }

std::size_t MtlModel::head_param_count(std::size_t t) const {
  return psi_[t].size();
}

MtlModel::ForwardCache MtlModel::forward(const Batch& batch) const {
  if (batch.input_dim != cfg_.input_dim)
    throw ConfigError("batch input_dim does not match model");
  if (batch.targets.size() != heads_.size() && !batch.targets.empty())
    throw ConfigError("batch task count does not match model heads");

  ForwardCache cache;
  cache.n = batch.n;
  cache.activations.resize(layers_.size() + 1);
  cache.activations[0] = batch.inputs;

  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerView& lv = layers_[l];
    std::vector<double>& z = cache.activations[l + 1];
    z.resize(batch.n * lv.out);
    kernels::linear_forward(cache.activations[l].data(), phi_.data() + lv.w,
                            phi_.data() + lv.b, z.data(), batch.n, lv.in,
                            lv.out);
    apply_activation(cfg_.activation, z);
  }

  cache.logits.resize(heads_.size());
  const std::vector<double>& feat = cache.activations.back();
  for (std::size_t t = 0; t < heads_.size(); ++t) {
    const Head& h = heads_[t];
    cache.logits[t].resize(batch.n * h.out);
    kernels::linear_forward(feat.data(), psi_[t].data(),
                            psi_[t].data() + h.out * h.in,
                            cache.logits[t].data(), batch.n, h.in, h.out);
    if (!all_finite(cache.logits[t]))
      throw NumericError("non-finite prediction in forward pass",
                         static_cast<int>(t));
  }
  return cache;
}

double MtlModel::task_loss(const TaskLossSpec& spec,
                           std::span<const double> logits,
                           const TaskTargets& targets, std::size_t n,
                           std::size_t dim, std::vector<double>* dlogits) {
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  if (dlogits) dlogits->assign(n * dim, 0.0);

  switch (spec.kind) {
    case LossKind::kSquaredError: {
      for (std::size_t i = 0; i < n * dim; ++i) {
        const double r = logits[i] - targets.values[i];
        loss += 0.5 * r * r;
        if (dlogits) (*dlogits)[i] = r * inv_n;
      }
      loss *= inv_n;
      break;
    }
    case LossKind::kSoftmaxCrossEntropy: {
      std::vector<double> p(dim);
      for (std::size_t s = 0; s < n; ++s) {
        const double* zs = logits.data() + s * dim;
        double zmax = zs[0];
        for (std::size_t k = 1; k < dim; ++k) zmax = std::max(zmax, zs[k]);
        double sum = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
          p[k] = std::exp(zs[k] - zmax);
          sum += p[k];
        }
        for (std::size_t k = 0; k < dim; ++k) p[k] /= sum;
        const int label = targets.labels[s];
        loss -= std::log(std::max(p[label], 1e-300));
        if (dlogits) {
          double* d = dlogits->data() + s * dim;
          for (std::size_t k = 0; k < dim; ++k) d[k] = p[k] * inv_n;
          d[label] -= inv_n;
        }
      }
      loss *= inv_n;
      break;
    }
    case LossKind::kWeightedBce: {
      const double wp = spec.bce_pos_weight;
      const double wn = 1.0 - wp;
      for (std::size_t i = 0; i < n * dim; ++i) {
        const double z = logits[i];
        const double y = targets.values[i];
        // stable log(sigmoid): -log(1+e^{-z}) = min(z,0) - log1p(e^{-|z|})
        const double log_sig = std::min(z, 0.0) - std::log1p(std::exp(-std::abs(z)));
        const double log_one_minus = log_sig - z;  // log(1-sigmoid(z))
        loss -= wp * y * log_sig + wn * (1.0 - y) * log_one_minus;
        if (dlogits) {
          const double sig = 1.0 / (1.0 + std::exp(-z));
          (*dlogits)[i] = (wp * y * (sig - 1.0) + wn * (1.0 - y) * sig) * inv_n;
        }
      }
      loss *= inv_n;
      break;
    }
  }

  // dlogits stays unscaled; backward_per_task applies the task scale as the
  // last multiply on the full gradient vectors so that scaling a loss and
  // weighting its gradient are the same floating-point operation
  return loss * spec.scale;
}

void MtlModel::backprop_shared(const Batch& batch, const ForwardCache& cache,
                               std::vector<double>& delta, double* grad) const {
  // delta arrives as dLoss/d(features); walk the shared stack backwards
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const LayerView& lv = layers_[l];
    apply_activation_grad(cfg_.activation, cache.activations[l + 1], delta);
    kernels::weight_grad(delta.data(), cache.activations[l].data(),
                         grad + lv.w, grad + lv.b, batch.n, lv.in, lv.out);
    if (l > 0) {
      std::vector<double> next(batch.n * lv.in);
      kernels::input_grad(delta.data(), phi_.data() + lv.w, next.data(),
                          batch.n, lv.in, lv.out);
      delta = std::move(next);
    }
  }
}

MtlModel::Backward MtlModel::backward_per_task(
    const Batch& batch, const ForwardCache& cache,
    std::span<const TaskLossSpec> losses) const {
  if (losses.size() != heads_.size())
    throw ConfigError("loss spec count does not match model heads");

  Backward out;
  out.losses.resize(heads_.size());
  out.shared_grads.resize(heads_.size());
  out.head_grads.resize(heads_.size());

  const std::vector<double>& feat = cache.activations.back();
  std::vector<double> dlogits;
  for (std::size_t t = 0; t < heads_.size(); ++t) {
    const Head& h = heads_[t];
    out.losses[t] = task_loss(losses[t], cache.logits[t], batch.targets[t],
                              batch.n, h.out, &dlogits);
    if (!std::isfinite(out.losses[t]))
      throw NumericError("non-finite loss", static_cast<int>(t));

    out.head_grads[t].assign(psi_[t].size(), 0.0);
    kernels::weight_grad(dlogits.data(), feat.data(), out.head_grads[t].data(),
                         out.head_grads[t].data() + h.out * h.in, batch.n,
                         h.in, h.out);

    std::vector<double> delta(batch.n * h.in);
    kernels::input_grad(dlogits.data(), psi_[t].data(), delta.data(), batch.n,
                        h.in, h.out);

    out.shared_grads[t].assign(phi_.size(), 0.0);
    backprop_shared(batch, cache, delta, out.shared_grads[t].data());

    if (losses[t].scale != 1.0) {
      kernels::scal(losses[t].scale, out.shared_grads[t].data(),
                    out.shared_grads[t].size());
      kernels::scal(losses[t].scale, out.head_grads[t].data(),
                    out.head_grads[t].size());
    }
  }
  return out;
}

std::vector<double> restrict_to_last_shared(std::span<const double> g,
                                            const MtlModel& model) {
  const ParamSpan span = model.last_shared_span();
  return std::vector<double>(g.begin() + span.begin, g.begin() + span.end);
}

}  // namespace gradbalance
