#include "gradbalance/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gradbalance/errors.hpp"
#include "gradbalance/kernels.hpp"

namespace gradbalance::diag {

namespace {

double clamp_cos(double c) { return std::clamp(c, -1.0, 1.0); }

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// closed-form least squares A = (F^T F)^-1 F^T G via Cholesky; falls back
// to a small ridge when the normal matrix is near singular
bool solve_normal_equations(std::vector<double>& ftf, std::size_t c,
                            std::vector<double>& rhs, std::size_t cols) {
  // in-place Cholesky of ftf (c x c)
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = ftf[i * c + j];
      for (std::size_t k = 0; k < j; ++k)
        sum -= ftf[i * c + k] * ftf[j * c + k];
      if (i == j) {
        if (sum <= 1e-12) return false;
        ftf[i * c + i] = std::sqrt(sum);
      } else {
        ftf[i * c + j] = sum / ftf[j * c + j];
      }
    }
  }
  // forward/back substitution for each rhs column block (rhs is c x cols)
  for (std::size_t col = 0; col < cols; ++col) {
    for (std::size_t i = 0; i < c; ++i) {
      double sum = rhs[i * cols + col];
      for (std::size_t k = 0; k < i; ++k)
        sum -= ftf[i * c + k] * rhs[k * cols + col];
      rhs[i * cols + col] = sum / ftf[i * c + i];
    }
    for (std::size_t i = c; i-- > 0;) {
      double sum = rhs[i * cols + col];
      for (std::size_t k = i + 1; k < c; ++k)
        sum -= ftf[k * c + i] * rhs[k * cols + col];
      rhs[i * cols + col] = sum / ftf[i * c + i];
    }
  }
  return true;
}

}  // namespace

CosToAggregate cos_to_aggregate(const GradientSet& gs,
                                std::span<const double> direction,
                                Scope scope) {
  CosToAggregate out;
  out.values.assign(gs.tasks, 0.0);
  out.zero_flags.assign(gs.tasks, 0);

  std::span<const double> d = direction;
  if (scope == Scope::kLastShared && gs.scope_end > 0)
    d = direction.subspan(gs.scope_begin, gs.scope_end - gs.scope_begin);
  const double dn = kernels::nrm2(d.data(), d.size());
  for (std::size_t t = 0; t < gs.tasks; ++t) {
    auto g = gs.scoped_row(t, scope);
    const double gn = kernels::nrm2(g.data(), g.size());
    if (gn <= 0.0 || dn <= 0.0) {
      out.zero_flags[t] = 1;
      continue;
    }
    out.values[t] =
        clamp_cos(kernels::dot(g.data(), d.data(), g.size()) / (gn * dn));
  }
  return out;
}

std::vector<double> pairwise_cosine(const GradientSet& gs, Scope scope) {
  std::vector<double> m(gs.tasks * gs.tasks, 0.0);
  std::vector<double> norms(gs.tasks);
  for (std::size_t t = 0; t < gs.tasks; ++t) {
    auto g = gs.scoped_row(t, scope);
    norms[t] = kernels::nrm2(g.data(), g.size());
  }
  for (std::size_t i = 0; i < gs.tasks; ++i) {
    for (std::size_t j = i; j < gs.tasks; ++j) {
      double c = 0.0;
      if (norms[i] > 0.0 && norms[j] > 0.0) {
        auto gi = gs.scoped_row(i, scope);
        auto gj = gs.scoped_row(j, scope);
        c = clamp_cos(kernels::dot(gi.data(), gj.data(), gi.size()) /
                      (norms[i] * norms[j]));
      }
      m[i * gs.tasks + j] = c;
      m[j * gs.tasks + i] = c;
    }
  }
  return m;
}

std::vector<double> pairwise_dot(const GradientSet& gs, Scope scope) {
  std::vector<double> m(gs.tasks * gs.tasks, 0.0);
  for (std::size_t i = 0; i < gs.tasks; ++i) {
    for (std::size_t j = i; j < gs.tasks; ++j) {
      auto gi = gs.scoped_row(i, scope);
      auto gj = gs.scoped_row(j, scope);
      const double d = kernels::dot(gi.data(), gj.data(), gi.size());
      m[i * gs.tasks + j] = d;
      m[j * gs.tasks + i] = d;
    }
  }
  return m;
}

std::vector<double> grad_norms(const GradientSet& gs, Scope scope) {
  std::vector<double> n(gs.tasks);
  for (std::size_t t = 0; t < gs.tasks; ++t) {
    auto g = gs.scoped_row(t, scope);
    n[t] = kernels::nrm2(g.data(), g.size());
  }
  return n;
}

void Trace::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open trace file for writing: " + path);
  out << "step,task,loss,weight,grad_norm,cos_to_agg\n";
  for (const TraceRecord& r : records_) {
    for (std::size_t t = 0; t < r.loss.size(); ++t) {
      out << r.step << ',' << t << ',' << fmt17(r.loss[t]) << ','
          << fmt17(r.weight[t]) << ',' << fmt17(r.grad_norm[t]) << ','
          << fmt17(r.cos_to_agg[t]) << '\n';
    }
  }
}

void Trace::write_pairwise_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open trace file for writing: " + path);
  out << "step,task_i,task_j,cosine,dot\n";
  for (const TraceRecord& r : records_) {
    const std::size_t t = r.loss.size();
    if (r.pair_cos.size() != t * t) continue;
    for (std::size_t i = 0; i < t; ++i) {
      for (std::size_t j = i + 1; j < t; ++j) {
        out << r.step << ',' << i << ',' << j << ','
            << fmt17(r.pair_cos[i * t + j]) << ','
            << fmt17(r.pair_dot[i * t + j]) << '\n';
      }
    }
  }
}

Trace Trace::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open trace file: " + path);
  std::string line;
  std::getline(in, line);  // header
  Trace trace;
  TraceRecord rec;
  long current = -1;
  bool any = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    const long step = std::stol(field);
    std::getline(ss, field, ',');  // task index, rows arrive in order
    double vals[4];
    for (double& v : vals) {
      std::getline(ss, field, ',');
      v = std::stod(field);
    }
    if (step != current) {
      if (any) trace.records_.push_back(rec);
      rec = TraceRecord{};
      rec.step = step;
      current = step;
      any = true;
    }
    rec.loss.push_back(vals[0]);
    rec.weight.push_back(vals[1]);
    rec.grad_norm.push_back(vals[2]);
    rec.cos_to_agg.push_back(vals[3]);
  }
  if (any) trace.records_.push_back(rec);
  return trace;
}

std::vector<double> smoothed(std::span<const double> series,
                             std::size_t window) {
  std::vector<double> out(series.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    acc += series[i];
    if (i >= window) acc -= series[i - window];
    out[i] = acc / double(std::min(i + 1, window));
  }
  return out;
}

ProbeReport feature_alignment_probe(const MtlModel& mtl_model,
                                    std::span<const MtlModel> stl_models,
                                    const Batch& probe_batch) {
  ProbeReport report;
  const std::size_t n = probe_batch.n;
  const std::size_t c = mtl_model.feature_dim();

  Batch inputs_only;
  inputs_only.n = probe_batch.n;
  inputs_only.input_dim = probe_batch.input_dim;
  inputs_only.inputs = probe_batch.inputs;

  const auto mtl_cache = mtl_model.forward(inputs_only);
  const std::span<const double> f = mtl_cache.features();

  // normal matrix F^T F, shared across tasks
  std::vector<double> ftf_base(c * c, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const double* fs = f.data() + s * c;
    for (std::size_t i = 0; i < c; ++i)
      for (std::size_t j = 0; j < c; ++j) ftf_base[i * c + j] += fs[i] * fs[j];
  }

  for (const MtlModel& stl : stl_models) {
    if (stl.input_dim() != mtl_model.input_dim())
      throw ConfigError("probe: STL input dim does not match MTL");
    const std::size_t cs = stl.feature_dim();
    const auto stl_cache = stl.forward(inputs_only);
    const std::span<const double> g = stl_cache.features();

    std::vector<double> rhs(c * cs, 0.0);  // F^T G
    for (std::size_t s = 0; s < n; ++s) {
      const double* fs = f.data() + s * c;
      const double* gs = g.data() + s * cs;
      for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < cs; ++j) rhs[i * cs + j] += fs[i] * gs[j];
    }

    std::vector<double> ftf = ftf_base;
    std::vector<double> adaptor = rhs;
    std::uint8_t ridge = 0;
    if (!solve_normal_equations(ftf, c, adaptor, cs)) {
      ftf = ftf_base;
      for (std::size_t i = 0; i < c; ++i) ftf[i * c + i] += 1e-6;
      adaptor = rhs;
      ridge = 1;
      if (!solve_normal_equations(ftf, c, adaptor, cs))
        throw NumericError("probe: normal equations unsolvable even with ridge");
    }

    double total = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double* fs = f.data() + s * c;
      const double* gs = g.data() + s * cs;
      for (std::size_t j = 0; j < cs; ++j) {
        double pred = 0.0;
        for (std::size_t i = 0; i < c; ++i) pred += fs[i] * adaptor[i * cs + j];
        const double r = pred - gs[j];
        total += r * r;
      }
    }
    report.mean_sq_dist.push_back(total / double(n));
    report.ridge_flags.push_back(ridge);
  }
  return report;
}

void write_probe_csv(const ProbeReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open probe file for writing: " + path);
  out << "task,mean_sq_dist,ridge\n";
  for (std::size_t t = 0; t < report.mean_sq_dist.size(); ++t) {
    out << t << ',' << fmt17(report.mean_sq_dist[t]) << ','
        << int(report.ridge_flags[t]) << '\n';
  }
}

}  // namespace gradbalance::diag
