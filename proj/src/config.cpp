#include "gradbalance/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "gradbalance/errors.hpp"

namespace gradbalance::harness {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

bool parse_number(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end && *end == '\0' && end != s.c_str();
}

ConfigValue parse_value(const std::string& raw, const std::string& where) {
  const std::string v = trim(raw);
  if (v.empty()) throw ConfigError("empty value for " + where);
  ConfigValue cv;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      throw ConfigError("unterminated string for " + where);
    cv.type = ConfigValue::Type::kString;
    cv.str = v.substr(1, v.size() - 2);
    return cv;
  }
  if (v == "true" || v == "false") {
    cv.type = ConfigValue::Type::kBool;
    cv.boolean = v == "true";
    return cv;
  }
  if (v.front() == '[') {
    if (v.back() != ']') throw ConfigError("unterminated array for " + where);
    const std::string inner = v.substr(1, v.size() - 2);
    std::vector<std::string> items;
    std::string cur;
    bool in_string = false;
    for (char c : inner) {
      if (c == '"') in_string = !in_string;
      if (c == ',' && !in_string) {
        items.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    const bool string_list = !items.empty() && items.front().front() == '"';
    cv.type = string_list ? ConfigValue::Type::kStringList
                          : ConfigValue::Type::kNumberList;
    for (const std::string& item : items) {
      if (string_list) {
        if (item.size() < 2 || item.front() != '"' || item.back() != '"')
          throw ConfigError("bad string array element for " + where);
        cv.strings.push_back(item.substr(1, item.size() - 2));
      } else {
        double num;
        if (!parse_number(item, num))
          throw ConfigError("bad numeric array element '" + item + "' for " +
                            where);
        cv.numbers.push_back(num);
      }
    }
    return cv;
  }
  double num;
  if (!parse_number(v, num))
    throw ConfigError("cannot parse value '" + v + "' for " + where);
  cv.type = ConfigValue::Type::kNumber;
  cv.number = num;
  return cv;
}

}  // namespace

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("bad section header at line " +
                          std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError("empty section name at line " +
                          std::to_string(lineno));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " +
                        std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    if (key.empty())
      throw ConfigError("empty key at line " + std::to_string(lineno));
    const std::string full = section.empty() ? key : section + "." + key;
    if (map.count(full))
      throw ConfigError("duplicate key: " + full);
    map[full] = parse_value(line.substr(eq + 1), full);
  }
  return map;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

namespace {

class TypedReader {
 public:
  explicit TypedReader(const ConfigMap& map) : map_(map) {}

  double number(const std::string& key, double fallback) {
    const ConfigValue* v = fetch(key);
    if (!v) return fallback;
    if (v->type != ConfigValue::Type::kNumber)
      throw ConfigError(key + " must be a number");
    return v->number;
  }
  long integer(const std::string& key, long fallback) {
    return static_cast<long>(number(key, double(fallback)));
  }
  bool boolean(const std::string& key, bool fallback) {
    const ConfigValue* v = fetch(key);
    if (!v) return fallback;
    if (v->type != ConfigValue::Type::kBool)
      throw ConfigError(key + " must be true or false");
    return v->boolean;
  }
  std::string str(const std::string& key, const std::string& fallback) {
    const ConfigValue* v = fetch(key);
    if (!v) return fallback;
    if (v->type != ConfigValue::Type::kString)
      throw ConfigError(key + " must be a string");
    return v->str;
  }
  std::vector<double> numbers(const std::string& key,
                              std::vector<double> fallback) {
    const ConfigValue* v = fetch(key);
    if (!v) return fallback;
    if (v->type == ConfigValue::Type::kNumberList) return v->numbers;
    if (v->type == ConfigValue::Type::kNumber) return {v->number};
    throw ConfigError(key + " must be a numeric array");
  }
  std::vector<std::string> strings(const std::string& key) {
    const ConfigValue* v = fetch(key);
    if (!v) return {};
    if (v->type != ConfigValue::Type::kStringList)
      throw ConfigError(key + " must be a string array");
    return v->strings;
  }
  bool has(const std::string& key) const { return map_.count(key) > 0; }

  void reject_unknown() const {
    for (const auto& [key, value] : map_) {
      if (!seen_.count(key)) throw ConfigError("unknown config key: " + key);
    }
  }

 private:
  const ConfigValue* fetch(const std::string& key) {
    seen_.insert(key);
    auto it = map_.find(key);
    return it == map_.end() ? nullptr : &it->second;
  }

  const ConfigMap& map_;
  mutable std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig experiment_from_map(const ConfigMap& map) {
  TypedReader r(map);
  ExperimentConfig cfg;

  cfg.dataset.tasks = static_cast<std::size_t>(r.integer("dataset.tasks", 3));
  cfg.dataset.input_dim =
      static_cast<std::size_t>(r.integer("dataset.input_dim", 16));
  cfg.dataset.latent_dim =
      static_cast<std::size_t>(r.integer("dataset.latent_dim", 8));
  cfg.dataset.n_train =
      static_cast<std::size_t>(r.integer("dataset.n_train", 2048));
  cfg.dataset.n_val = static_cast<std::size_t>(r.integer("dataset.n_val", 512));
  cfg.dataset.n_test =
      static_cast<std::size_t>(r.integer("dataset.n_test", 512));
  cfg.dataset.groups = static_cast<std::size_t>(r.integer("dataset.groups", 8));
  cfg.dataset.scales = r.numbers("dataset.scales", {});
  cfg.dataset.noise = r.number("dataset.noise", 0.1);
  cfg.dataset.identical_tasks = r.boolean("dataset.identical_tasks", false);
  cfg.dataset.classes = static_cast<std::size_t>(r.integer("dataset.classes", 4));
  cfg.dataset.class_margin = r.number("dataset.class_margin", 0.0);
  cfg.corrupt_flip_p = r.number("dataset.flip_p", 0.0);
  cfg.corrupt_gauss_sigma = r.number("dataset.gauss_sigma", 0.0);
  cfg.subsample_mode = r.str("dataset.subsample_mode", "none");
  cfg.subsample_amount = r.number("dataset.subsample_amount", 1.0);
  if (cfg.subsample_mode != "none" && cfg.subsample_mode != "groups" &&
      cfg.subsample_mode != "within_groups")
    throw ConfigError("dataset.subsample_mode must be none, groups or "
                      "within_groups");

  const std::vector<double> hidden =
      r.numbers("model.hidden", {32.0, 32.0});
  cfg.model.hidden.clear();
  for (double h : hidden) {
    if (h < 1.0) throw ConfigError("model.hidden entries must be >= 1");
    cfg.model.hidden.push_back(static_cast<std::size_t>(h));
  }
  cfg.model.activation =
      activation_from_string(r.str("model.activation", "tanh"));
  cfg.model.init_range = r.number("model.init_range", 0.0);

  cfg.train.steps = r.integer("train.steps", 2000);
  cfg.train.lr = r.number("train.lr", 0.004);
  cfg.train.batch_size =
      static_cast<std::size_t>(r.integer("train.batch_size", 128));
  cfg.train.optimizer = r.str("train.optimizer", "adam");
  cfg.train.lr_schedule = r.str("train.lr_schedule", "poly");
  cfg.train.eval_stride = r.integer("train.eval_stride", 100);
  cfg.train.best_val_select = r.boolean("train.best_val", true);

  cfg.combiner.id = r.str("combiner.id", "uniform");
  cfg.combiner.fixed_weights = r.numbers("combiner.fixed_weights", {});
  const std::string scope = r.str("combiner.avgnorm_scope", "last_shared");
  if (scope == "full")
    cfg.combiner.avgnorm_scope = Scope::kFull;
  else if (scope == "last_shared")
    cfg.combiner.avgnorm_scope = Scope::kLastShared;
  else
    throw ConfigError("combiner.avgnorm_scope must be full or last_shared");
  cfg.combiner.uw_inner_lr = r.number("combiner.uw_lr", 0.025);
  cfg.combiner.gradnorm_exponent = r.number("combiner.gradnorm_alpha", 1.5);
  cfg.combiner.gradnorm_inner_lr = r.number("combiner.gradnorm_lr", 0.025);
  cfg.combiner.dwa_temperature = r.number("combiner.dwa_temp", 2.0);
  cfg.combiner.famo_inner_lr = r.number("combiner.famo_lr", 0.025);
  cfg.combiner.famo_decay = r.number("combiner.famo_gamma", 0.001);
  cfg.combiner.cagrad_c = r.number("combiner.cagrad_c", 0.4);
  cfg.combiner.bargain_damping = r.number("combiner.bargain_rho", 0.5);
  cfg.combiner.fairgrad_exponent = r.number("combiner.fairgrad_alpha", 2.0);
  cfg.combiner.eps_norm = r.number("combiner.eps_norm", combiners::kEpsNorm);
  cfg.combiner.solver.tol = r.number("combiner.solver_tol", 1e-8);
  cfg.combiner.solver.max_iter =
      static_cast<int>(r.integer("combiner.solver_max_iter", 200));

  const std::vector<double> seeds = r.numbers("run.seeds", {0.0});
  cfg.seeds.clear();
  for (double s : seeds) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  if (cfg.seeds.empty()) throw ConfigError("run.seeds must not be empty");
  cfg.train.trace_stride = r.integer("run.trace_stride", 0);
  cfg.out_dir = r.str("run.out_dir", "out");
  cfg.jobs = static_cast<int>(r.integer("run.jobs", 1));

  if (r.has("baseline.values")) {
    metrics::BaselineTable table;
    const std::vector<std::string> names = r.strings("baseline.tasks");
    const std::vector<std::string> mets = r.strings("baseline.metrics");
    const std::vector<double> values = r.numbers("baseline.values", {});
    const std::vector<double> lib = r.numbers("baseline.lower_is_better", {});
    if (names.size() != values.size() || mets.size() != values.size() ||
        lib.size() != values.size())
      throw ConfigError("baseline arrays must have equal lengths");
    for (std::size_t i = 0; i < values.size(); ++i) {
      table.entries.push_back(
          {names[i], mets[i], values[i], lib[i] != 0.0});
    }
    cfg.fixed_baseline = std::move(table);
  }

  r.reject_unknown();
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
  return experiment_from_map(parse_config_file(path));
}

problems::SyntheticDataset materialize_dataset(const ExperimentConfig& cfg,
                                               std::uint64_t seed) {
  problems::DatasetSpec spec = cfg.dataset;
  spec.seed = seed;
  problems::SyntheticDataset ds = problems::gen_scaled_suite(spec);
  if (cfg.corrupt_flip_p > 0.0 || cfg.corrupt_gauss_sigma > 0.0)
    ds = problems::corrupt_labels(ds, cfg.corrupt_flip_p,
                                  cfg.corrupt_gauss_sigma);
  if (cfg.subsample_mode != "none") {
    const auto mode = cfg.subsample_mode == "groups"
                          ? problems::SubsampleMode::kGroups
                          : problems::SubsampleMode::kWithinGroups;
    ds = problems::subsample(ds, mode, cfg.subsample_amount);
  }
  return ds;
}

namespace {

std::string num_repr(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string ExperimentConfig::canonical() const {
  // sorted section.key = value lines; field order in the source file never
  // matters for the hash
  std::map<std::string, std::string> kv;
  kv["dataset.tasks"] = std::to_string(dataset.tasks);
  kv["dataset.input_dim"] = std::to_string(dataset.input_dim);
  kv["dataset.latent_dim"] = std::to_string(dataset.latent_dim);
  kv["dataset.n_train"] = std::to_string(dataset.n_train);
  kv["dataset.n_val"] = std::to_string(dataset.n_val);
  kv["dataset.n_test"] = std::to_string(dataset.n_test);
  kv["dataset.groups"] = std::to_string(dataset.groups);
  {
    std::string s = "[";
    for (std::size_t i = 0; i < dataset.scales.size(); ++i)
      s += (i ? "," : "") + num_repr(dataset.scales[i]);
    kv["dataset.scales"] = s + "]";
  }
  kv["dataset.noise"] = num_repr(dataset.noise);
  kv["dataset.identical_tasks"] = dataset.identical_tasks ? "true" : "false";
  kv["dataset.classes"] = std::to_string(dataset.classes);
  kv["dataset.class_margin"] = num_repr(dataset.class_margin);
  kv["dataset.flip_p"] = num_repr(corrupt_flip_p);
  kv["dataset.gauss_sigma"] = num_repr(corrupt_gauss_sigma);
  kv["dataset.subsample_mode"] = subsample_mode;
  kv["dataset.subsample_amount"] = num_repr(subsample_amount);
  {
    std::string s = "[";
    for (std::size_t i = 0; i < model.hidden.size(); ++i)
      s += (i ? "," : "") + std::to_string(model.hidden[i]);
    kv["model.hidden"] = s + "]";
  }
  kv["model.activation"] =
      model.activation == Activation::kTanh
          ? "tanh"
          : (model.activation == Activation::kRelu ? "relu" : "identity");
  kv["model.init_range"] = num_repr(model.init_range);
  kv["train.steps"] = std::to_string(train.steps);
  kv["train.lr"] = num_repr(train.lr);
  kv["train.batch_size"] = std::to_string(train.batch_size);
  kv["train.optimizer"] = train.optimizer;
  kv["train.lr_schedule"] = train.lr_schedule;
  kv["train.eval_stride"] = std::to_string(train.eval_stride);
  kv["train.best_val"] = train.best_val_select ? "true" : "false";
  kv["combiner.id"] = combiner.id;
  {
    std::string s = "[";
    for (std::size_t i = 0; i < combiner.fixed_weights.size(); ++i)
      s += (i ? "," : "") + num_repr(combiner.fixed_weights[i]);
    kv["combiner.fixed_weights"] = s + "]";
  }
  kv["combiner.avgnorm_scope"] =
      combiner.avgnorm_scope == Scope::kFull ? "full" : "last_shared";
  kv["combiner.uw_lr"] = num_repr(combiner.uw_inner_lr);
  kv["combiner.gradnorm_alpha"] = num_repr(combiner.gradnorm_exponent);
  kv["combiner.gradnorm_lr"] = num_repr(combiner.gradnorm_inner_lr);
  kv["combiner.dwa_temp"] = num_repr(combiner.dwa_temperature);
  kv["combiner.famo_lr"] = num_repr(combiner.famo_inner_lr);
  kv["combiner.famo_gamma"] = num_repr(combiner.famo_decay);
  kv["combiner.cagrad_c"] = num_repr(combiner.cagrad_c);
  kv["combiner.bargain_rho"] = num_repr(combiner.bargain_damping);
  kv["combiner.fairgrad_alpha"] = num_repr(combiner.fairgrad_exponent);
  kv["combiner.eps_norm"] = num_repr(combiner.eps_norm);
  kv["combiner.solver_tol"] = num_repr(combiner.solver.tol);
  kv["combiner.solver_max_iter"] = std::to_string(combiner.solver.max_iter);
  {
    std::string s = "[";
    for (std::size_t i = 0; i < seeds.size(); ++i)
      s += (i ? "," : "") + std::to_string(seeds[i]);
    kv["run.seeds"] = s + "]";
  }
  kv["run.trace_stride"] = std::to_string(train.trace_stride);
  if (fixed_baseline) {
    std::string s = "[";
    for (std::size_t i = 0; i < fixed_baseline->entries.size(); ++i) {
      const auto& e = fixed_baseline->entries[i];
      s += (i ? ";" : "") + e.task + ":" + e.metric + ":" + num_repr(e.value) +
           ":" + (e.lower_is_better ? "1" : "0");
    }
    kv["baseline"] = s + "]";
  }
  // out_dir and jobs deliberately excluded: they do not affect results

  std::string text;
  for (const auto& [key, value] : kv) text += key + "=" + value + "\n";
  return text;
}

std::string ExperimentConfig::hash() const {
  const std::string text = canonical();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gradbalance::harness
