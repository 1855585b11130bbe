#include "gradbalance/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "gradbalance/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gradbalance::harness {

namespace {

double vec_mean(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / double(v.size());
}

double vec_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = vec_mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / double(v.size() - 1));
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir);
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    seeds.push_back(std::stoull(item));
  }
  if (seeds.empty()) throw ConfigError("empty seed list");
  return seeds;
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

problems::TrainConfig baseline_train_config(const ExperimentConfig& cfg) {
  problems::TrainConfig tc = cfg.train;
  tc.trace_stride = 0;  // baselines never trace
  return tc;
}

}  // namespace

void parallel_cells(int jobs, std::size_t n,
                    const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min<std::size_t>(jobs, n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!failed.exchange(true)) first_error = e.what();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failed.load()) throw Error(first_error);
}

SeedContext prepare_seed(const ExperimentConfig& cfg, std::uint64_t seed,
                         bool keep_stl_models) {
  SeedContext ctx;
  ctx.seed = seed;
  ctx.ds = materialize_dataset(cfg, seed);

  if (cfg.fixed_baseline) {
    if (cfg.fixed_baseline->entries.size() != ctx.ds.tasks.size())
      throw ConfigError("fixed baseline task count does not match dataset");
    ctx.val_table = *cfg.fixed_baseline;
    ctx.test_table = *cfg.fixed_baseline;
    return ctx;
  }

  const problems::TrainConfig tc = baseline_train_config(cfg);
  for (std::size_t t = 0; t < ctx.ds.tasks.size(); ++t) {
    const problems::SyntheticDataset single =
        problems::restrict_to_task(ctx.ds, t);
    auto outcome = problems::train_stl(cfg.model, ctx.ds, t, tc, seed);
    const double val =
        problems::evaluate(outcome.model, single.val, single.tasks)[0];
    const double test =
        problems::evaluate(outcome.model, single.test, single.tasks)[0];
    const problems::TaskSpec& spec = ctx.ds.tasks[t];
    ctx.val_table.entries.push_back({spec.id, metrics::metric_name(spec.metric),
                                     val, spec.lower_is_better});
    ctx.test_table.entries.push_back({spec.id,
                                      metrics::metric_name(spec.metric), test,
                                      spec.lower_is_better});
    if (keep_stl_models) ctx.stl_models.push_back(std::move(outcome.model));
  }
  return ctx;
}

CellOutcome run_cell(const ExperimentConfig& cfg, const SeedContext& ctx,
                     const combiners::CombinerConfig& combiner_cfg,
                     bool keep_model) {
  combiners::CombinerConfig cc = combiner_cfg;
  cc.seed = ctx.seed;
  auto combiner = combiners::make_combiner(cc, ctx.ds.tasks.size());

  auto outcome = problems::train_mtl(cfg.model, ctx.ds, *combiner, cfg.train,
                                     ctx.seed, &ctx.val_table);

  CellOutcome cell;
  cell.test_metrics =
      problems::evaluate(outcome.model, ctx.ds.test, ctx.ds.tasks);
  cell.dm = metrics::delta_m(cell.test_metrics, ctx.test_table);
  cell.val_dm = metrics::delta_m(
      problems::evaluate(outcome.model, ctx.ds.val, ctx.ds.tasks),
      ctx.val_table);
  cell.trace = std::move(outcome.trace);
  cell.best_step = outcome.best_step;
  if (keep_model) cell.model.emplace(std::move(outcome.model));
  return cell;
}

RunSummary summarize(const ExperimentConfig& cfg, const std::string& combiner,
                     const std::vector<SeedContext>& contexts,
                     const std::vector<CellOutcome>& cells, double wall_s) {
  RunSummary s;
  s.config_hash = cfg.hash();
  s.combiner = combiner;
  s.seeds = cfg.seeds;
  s.wall_time_s = wall_s;

  const std::size_t tasks = contexts.front().ds.tasks.size();
  for (std::size_t t = 0; t < tasks; ++t) {
    std::vector<double> vals;
    for (const CellOutcome& c : cells) vals.push_back(c.test_metrics[t]);
    const problems::TaskSpec& spec = contexts.front().ds.tasks[t];
    s.per_task.push_back({spec.id, metrics::metric_name(spec.metric),
                          vec_mean(vals), vec_std(vals)});
  }
  std::vector<double> dms;
  for (const CellOutcome& c : cells) dms.push_back(c.dm.value_pct);
  s.delta_m_mean = vec_mean(dms);
  s.delta_m_std = vec_std(dms);
  return s;
}

std::string RunSummary::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["combiner"] = combiner;
  j["seeds"] = seeds;
  j["per_task"] = json::array();
  for (const TaskStats& t : per_task) {
    j["per_task"].push_back({{"task", t.task},
                             {"metric", t.metric},
                             {"mean", t.mean},
                             {"std", t.std_dev}});
  }
  j["delta_m"] = {{"mean", delta_m_mean}, {"std", delta_m_std}};
  if (chosen_weights.empty()) {
    j["chosen_weights"] = nullptr;
  } else {
    j["chosen_weights"] = chosen_weights;
  }
  j["wall_time_s"] = wall_time_s;
  return j.dump(2);
}

void RunSummary::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write summary: " + path);
  out << to_json() << '\n';
}

namespace {

struct CliOverrides {
  std::string combiner;
  std::string seeds;
  long steps = -1;
  double lr = -1.0;
  long batch_size = -1;
  long trace_stride = -1;
  std::string out_dir;
  int jobs = 0;
};

void apply_overrides(ExperimentConfig& cfg, const CliOverrides& ov) {
  if (!ov.combiner.empty()) cfg.combiner.id = ov.combiner;
  if (!ov.seeds.empty()) cfg.seeds = parse_seed_list(ov.seeds);
  if (ov.steps >= 0) cfg.train.steps = ov.steps;
  if (ov.lr >= 0.0) cfg.train.lr = ov.lr;
  if (ov.batch_size >= 0) cfg.train.batch_size = std::size_t(ov.batch_size);
  if (ov.trace_stride >= 0) cfg.train.trace_stride = ov.trace_stride;
  if (!ov.out_dir.empty()) cfg.out_dir = ov.out_dir;
  if (ov.jobs > 0) cfg.jobs = ov.jobs;
  if (const char* env = std::getenv("GRADBALANCE_OUT"))
    if (*env) cfg.out_dir = env;
}

std::vector<SeedContext> prepare_all_seeds(const ExperimentConfig& cfg,
                                           bool keep_stl = false) {
  std::vector<std::optional<SeedContext>> slots(cfg.seeds.size());
  parallel_cells(cfg.jobs, cfg.seeds.size(), [&](std::size_t i) {
    slots[i] = prepare_seed(cfg, cfg.seeds[i], keep_stl);
  });
  std::vector<SeedContext> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

void write_traces(const ExperimentConfig& cfg,
                  const std::vector<CellOutcome>& cells) {
  if (cfg.train.trace_stride <= 0) return;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string tag = "seed" + std::to_string(cfg.seeds[i]);
    cells[i].trace.write_csv(cfg.out_dir + "/trace_" + tag + ".csv");
    cells[i].trace.write_pairwise_csv(cfg.out_dir + "/pairwise_" + tag +
                                      ".csv");
  }
}

int cmd_run(ExperimentConfig cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ensure_dir(cfg.out_dir);
  const std::vector<SeedContext> contexts = prepare_all_seeds(cfg);
  std::vector<CellOutcome> cells(contexts.size());
  parallel_cells(cfg.jobs, contexts.size(), [&](std::size_t i) {
    cells[i] = run_cell(cfg, contexts[i], cfg.combiner);
  });
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  RunSummary summary = summarize(cfg, cfg.combiner.id, contexts, cells, wall);
  summary.write(cfg.out_dir + "/summary.json");
  write_traces(cfg, cells);

  std::cout << "combiner " << summary.combiner << " over " << cfg.seeds.size()
            << " seed(s)\n";
  for (const TaskStats& t : summary.per_task) {
    std::cout << "  " << t.task << " " << t.metric << " = " << t.mean
              << " +- " << t.std_dev << "\n";
  }
  std::cout << "  delta_m% = " << metrics::format_pct(summary.delta_m_mean)
            << " +- " << summary.delta_m_std << "\n";
  return 0;
}

int cmd_grid(ExperimentConfig cfg, std::vector<std::string> weight_args,
             long cap) {
  const auto t0 = std::chrono::steady_clock::now();
  ensure_dir(cfg.out_dir);

  const std::size_t tasks = cfg.dataset.tasks;
  if (weight_args.empty())
    throw ConfigError("grid needs at least one --weights list");
  if (weight_args.size() == 1)
    weight_args.assign(tasks, weight_args.front());
  if (weight_args.size() != tasks)
    throw ConfigError("grid needs one --weights list per task (" +
                      std::to_string(tasks) + ")");

  std::vector<std::vector<double>> candidates;
  std::size_t total = 1;
  for (const std::string& arg : weight_args) {
    std::vector<double> c = parse_number_list(arg);
    if (c.empty()) throw ConfigError("empty weight candidate list");
    for (double w : c)
      if (w < 0.0) throw ConfigError("grid weights must be non-negative");
    total *= c.size();
    candidates.push_back(std::move(c));
  }
  if (total > std::size_t(cap))
    throw ConfigError("grid size " + std::to_string(total) +
                      " exceeds cap " + std::to_string(cap) +
                      "; use a coarser grid or raise --cap");

  std::vector<std::vector<double>> combos;
  std::vector<double> cur(tasks);
  const std::function<void(std::size_t)> expand = [&](std::size_t t) {
    if (t == tasks) {
      combos.push_back(cur);
      return;
    }
    for (double w : candidates[t]) {
      cur[t] = w;
      expand(t + 1);
    }
  };
  expand(0);

  const std::vector<SeedContext> contexts = prepare_all_seeds(cfg);

  // extreme corners of the grid can push an already-scaled loss past the
  // stability limit; a diverged point simply drops out of the leaderboard
  std::vector<CellOutcome> cells(combos.size() * contexts.size());
  std::atomic<long> diverged{0};
  parallel_cells(cfg.jobs, cells.size(), [&](std::size_t i) {
    const std::size_t combo = i / contexts.size();
    const std::size_t seed_idx = i % contexts.size();
    combiners::CombinerConfig cc = cfg.combiner;
    cc.id = "fixed";
    cc.fixed_weights = combos[combo];
    try {
      cells[i] = run_cell(cfg, contexts[seed_idx], cc);
    } catch (const DivergenceError&) {
      cells[i] = CellOutcome{};
      cells[i].dm.value_pct = -std::numeric_limits<double>::infinity();
      cells[i].val_dm.value_pct = -std::numeric_limits<double>::infinity();
      diverged.fetch_add(1);
    }
  });
  if (diverged.load() == long(cells.size()))
    throw Error("every grid point diverged; lower the learning rate");

  std::vector<double> val_means(combos.size()), test_means(combos.size());
  for (std::size_t cidx = 0; cidx < combos.size(); ++cidx) {
    std::vector<double> vals, tests;
    for (std::size_t s = 0; s < contexts.size(); ++s) {
      vals.push_back(cells[cidx * contexts.size() + s].val_dm.value_pct);
      tests.push_back(cells[cidx * contexts.size() + s].dm.value_pct);
    }
    val_means[cidx] = vec_mean(vals);
    test_means[cidx] = vec_mean(tests);
  }

  std::vector<std::size_t> order(combos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return val_means[a] > val_means[b];
  });
  const std::size_t winner = order.front();

  {
    std::ofstream out(cfg.out_dir + "/leaderboard.csv");
    if (!out) throw Error("cannot write leaderboard");
    for (std::size_t t = 0; t < tasks; ++t) out << "w" << t << ",";
    out << "val_delta_m,test_delta_m\n";
    for (std::size_t idx : order) {
      for (double w : combos[idx]) out << w << ",";
      out << val_means[idx] << "," << test_means[idx] << "\n";
    }
  }

  std::vector<CellOutcome> winner_cells(
      cells.begin() + winner * contexts.size(),
      cells.begin() + (winner + 1) * contexts.size());
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  RunSummary summary = summarize(cfg, "fixed", contexts, winner_cells, wall);
  summary.chosen_weights = combos[winner];
  summary.write(cfg.out_dir + "/summary.json");

  std::cout << "grid of " << combos.size() << " points, winner weights = [";
  for (std::size_t t = 0; t < tasks; ++t)
    std::cout << (t ? "," : "") << combos[winner][t];
  std::cout << "], val delta_m% = " << metrics::format_pct(val_means[winner])
            << ", test delta_m% = "
            << metrics::format_pct(summary.delta_m_mean) << "\n";
  return 0;
}

int cmd_sweep(ExperimentConfig cfg, const std::string& ids_arg, long seeds_k) {
  const auto t0 = std::chrono::steady_clock::now();
  ensure_dir(cfg.out_dir);

  std::vector<std::string> ids;
  if (ids_arg.empty() || ids_arg == "all") {
    ids = combiners::combiner_ids();
  } else {
    std::stringstream ss(ids_arg);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) ids.push_back(item);
  }
  if (ids.empty()) throw ConfigError("sweep needs at least one combiner id");
  for (const std::string& id : ids) {
    const auto& known = combiners::combiner_ids();
    if (std::find(known.begin(), known.end(), id) == known.end())
      throw ConfigError("unknown combiner id: " + id);
  }
  if (seeds_k > 0) {
    cfg.seeds.clear();
    for (long s = 0; s < seeds_k; ++s)
      cfg.seeds.push_back(std::uint64_t(s));
  }

  const std::vector<SeedContext> contexts = prepare_all_seeds(cfg);
  std::vector<CellOutcome> cells(ids.size() * contexts.size());
  parallel_cells(cfg.jobs, cells.size(), [&](std::size_t i) {
    const std::size_t id_idx = i / contexts.size();
    const std::size_t seed_idx = i % contexts.size();
    combiners::CombinerConfig cc = cfg.combiner;
    cc.id = ids[id_idx];
    cells[i] = run_cell(cfg, contexts[seed_idx], cc);
  });
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  std::vector<RunSummary> summaries;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::vector<CellOutcome> slice(
        cells.begin() + i * contexts.size(),
        cells.begin() + (i + 1) * contexts.size());
    RunSummary s = summarize(cfg, ids[i], contexts, slice, wall);
    s.write(cfg.out_dir + "/summary_" + ids[i] + ".json");
    summaries.push_back(std::move(s));
  }

  std::stable_sort(summaries.begin(), summaries.end(),
                   [](const RunSummary& a, const RunSummary& b) {
                     return a.delta_m_mean > b.delta_m_mean;
                   });
  std::ofstream csv(cfg.out_dir + "/sweep.csv");
  csv << "combiner,delta_m_mean,delta_m_std\n";
  std::cout << "combiner      delta_m%   std\n";
  for (const RunSummary& s : summaries) {
    csv << s.combiner << "," << s.delta_m_mean << "," << s.delta_m_std << "\n";
    std::cout << s.combiner;
    for (std::size_t pad = s.combiner.size(); pad < 12; ++pad) std::cout << ' ';
    std::cout << "  " << metrics::format_pct(s.delta_m_mean) << "     "
              << s.delta_m_std << "\n";
  }
  return 0;
}

int cmd_diagnose(ExperimentConfig cfg, long smooth_window) {
  const auto t0 = std::chrono::steady_clock::now();
  ensure_dir(cfg.out_dir);
  if (cfg.train.trace_stride <= 0) cfg.train.trace_stride = 1;

  const std::vector<SeedContext> contexts = prepare_all_seeds(cfg, true);
  std::vector<CellOutcome> cells(contexts.size());
  parallel_cells(cfg.jobs, contexts.size(), [&](std::size_t i) {
    cells[i] = run_cell(cfg, contexts[i], cfg.combiner, /*keep_model=*/true);
  });
  write_traces(cfg, cells);

  // feature-distance probe against the frozen single-task encoders
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const SeedContext& ctx = contexts[i];
    if (ctx.stl_models.empty() || !cells[i].model) continue;
    const auto report = diag::feature_alignment_probe(
        *cells[i].model, ctx.stl_models, ctx.ds.val);
    diag::write_probe_csv(report, cfg.out_dir + "/probe_seed" +
                                      std::to_string(cfg.seeds[i]) + ".csv");
  }

  if (smooth_window > 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const diag::Trace& tr = cells[i].trace;
      const std::size_t tasks = tr.task_count();
      std::vector<std::vector<double>> series(tasks);
      for (const auto& rec : tr.records())
        for (std::size_t t = 0; t < tasks; ++t)
          series[t].push_back(rec.cos_to_agg[t]);
      std::ofstream out(cfg.out_dir + "/trace_smoothed_seed" +
                        std::to_string(cfg.seeds[i]) + ".csv");
      out << "step,task,cos_to_agg_smoothed\n";
      for (std::size_t t = 0; t < tasks; ++t) {
        const auto sm = diag::smoothed(series[t], std::size_t(smooth_window));
        for (std::size_t r = 0; r < sm.size(); ++r)
          out << tr.records()[r].step << ',' << t << ',' << sm[r] << '\n';
      }
    }
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  RunSummary summary = summarize(cfg, cfg.combiner.id, contexts, cells, wall);
  summary.write(cfg.out_dir + "/summary.json");
  std::cout << "diagnose wrote traces for " << contexts.size()
            << " seed(s) to " << cfg.out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& dir) {
  std::vector<std::pair<std::string, json>> rows;
  if (fs::exists(dir)) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const std::string& path : files) {
      std::ifstream in(path);
      json j;
      try {
        in >> j;
      } catch (...) {
        continue;
      }
      if (j.contains("config_hash") && j.contains("delta_m"))
        rows.emplace_back(fs::path(path).filename(), j);
    }
  }
  using Row = std::pair<std::string, json>;
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.second["delta_m"]["mean"].get<double>() >
           b.second["delta_m"]["mean"].get<double>();
  });

  std::cout << "file                          combiner      delta_m%\n";
  std::ostringstream csv;
  csv << "file,combiner,delta_m_mean,delta_m_std\n";
  for (const auto& [file, j] : rows) {
    const std::string combiner = j["combiner"].get<std::string>();
    const double mean = j["delta_m"]["mean"].get<double>();
    const double sd = j["delta_m"]["std"].get<double>();
    std::cout << file;
    for (std::size_t pad = file.size(); pad < 30; ++pad) std::cout << ' ';
    std::cout << combiner;
    for (std::size_t pad = combiner.size(); pad < 12; ++pad) std::cout << ' ';
    std::cout << "  " << metrics::format_pct(mean) << "\n";
    csv << file << ',' << combiner << ',' << mean << ',' << sd << '\n';
  }
  if (fs::exists(dir)) {
    std::ofstream out(fs::path(dir) / "report.csv");
    out << csv.str();
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"multi-task gradient balancing laboratory"};
  app.require_subcommand(1);

  std::string config_path, report_dir;
  CliOverrides ov;
  std::vector<std::string> grid_weights;
  long grid_cap = 4096;
  std::string sweep_ids;
  long sweep_seeds = 0;
  long smooth_window = 0;

  auto add_common = [&](CLI::App* cmd, bool with_seed_list) {
    cmd->add_option("config", config_path, "experiment config file")
        ->required();
    cmd->add_option("--combiner", ov.combiner, "combiner id override");
    if (with_seed_list)
      cmd->add_option("--seeds", ov.seeds, "comma-separated seed list");
    cmd->add_option("--steps", ov.steps, "training steps override");
    cmd->add_option("--lr", ov.lr, "learning rate override");
    cmd->add_option("--batch-size", ov.batch_size, "batch size override");
    cmd->add_option("--trace-stride", ov.trace_stride,
                    "record a trace row every N steps");
    cmd->add_option("--out", ov.out_dir, "output directory override");
    cmd->add_option("--jobs", ov.jobs, "parallel cells");
  };

  CLI::App* run = app.add_subcommand("run", "single experiment");
  add_common(run, true);
  CLI::App* grid =
      app.add_subcommand("grid", "fixed-weight grid search, best by "
                                 "validation delta_m");
  add_common(grid, true);
  grid->add_option("--weights", grid_weights,
                   "per-task candidate list, e.g. 0.01,0.1,1 (repeat per task "
                   "or give once for all)");
  grid->add_option("--cap", grid_cap, "max grid points");
  CLI::App* sweep = app.add_subcommand("sweep", "combiner x seed comparison");
  add_common(sweep, false);
  sweep->add_option("--combiners", sweep_ids,
                    "comma-separated combiner ids (default: all)");
  sweep->add_option("--seeds", sweep_seeds, "run seeds 0..k-1");
  CLI::App* diagnose =
      app.add_subcommand("diagnose", "stride-1 traces plus feature probe");
  add_common(diagnose, true);
  diagnose->add_option("--smooth", smooth_window,
                       "also emit a smoothed cosine trace (window size)");
  CLI::App* report = app.add_subcommand("report", "aggregate summary JSONs");
  report->add_option("dir", report_dir, "directory of summary files")
      ->required();

  std::vector<std::string> argv_like = args;
  std::reverse(argv_like.begin(), argv_like.end());
  try {
    app.parse(argv_like);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (report->parsed()) return cmd_report(report_dir);
    ExperimentConfig cfg = load_experiment(config_path);
    apply_overrides(cfg, ov);
    if (run->parsed()) return cmd_run(std::move(cfg));
    if (grid->parsed())
      return cmd_grid(std::move(cfg), grid_weights, grid_cap);
    if (sweep->parsed())
      return cmd_sweep(std::move(cfg), sweep_ids, sweep_seeds);
    if (diagnose->parsed()) return cmd_diagnose(std::move(cfg), smooth_window);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "numeric failure: " << e.what() << "\nsnapshot: "
              << e.snapshot() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gradbalance::harness
