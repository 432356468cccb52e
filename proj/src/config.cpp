// Copyright 2026 The otafl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "otafl/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

extern char** environ;

namespace otafl {

using nlohmann::json;

namespace {

// Walks one JSON object, records which keys were read and rejects the rest.
class Section {
 public:
  Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ != nullptr && !node_->is_object()) {
      throw ValidationError(path_.empty() ? "<root>" : path_, "must be an object");
    }
  }

  Section sub(const char* key) {
    return Section(find(key), field(key));
  }

  void get(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ValidationError(field(key), "must be a number");
      out = v->get<double>();
    }
  }
  void get(const char* key, int& out) {
    if (const json* v = find(key)) out = static_cast<int>(integer(*v, key));
  }
  void get(const char* key, std::int64_t& out) {
    if (const json* v = find(key)) out = integer(*v, key);
  }
  void get(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned() &&
          !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
        throw ValidationError(field(key), "must be a non-negative integer");
      }
      out = v->get<std::uint64_t>();
    }
  }
  void get(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ValidationError(field(key), "must be a boolean");
      out = v->get<bool>();
    }
  }
  void get(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ValidationError(field(key), "must be a string");
      out = v->get<std::string>();
    }
  }
  template <class T>
  void get(const char* key, std::optional<T>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      T value{};
      get(key, value);
      out = value;
    }
  }
  template <class T>
  void get(const char* key, std::vector<T>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ValidationError(field(key), "must be an array");
      out.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json wrapped = {{"v", (*v)[i]}};
        Section item(&wrapped, field(key) + "[" + std::to_string(i) + "]");
        T value{};
        item.get_as_item(value);
        out.push_back(value);
      }
    }
  }

  bool has(const char* key) const { return node_ != nullptr && node_->contains(key); }
  const json* raw(const char* key) { return find(key); }

  void finish() const {
    if (node_ == nullptr) return;
    for (const auto& item : node_->items()) {
      if (!seen_.contains(item.key())) {
        throw ValidationError(field(item.key().c_str()), "unknown key");
      }
    }
  }

  std::string field(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

 private:
  template <class T>
  void get_as_item(T& value) {
    const json* v = find("v");
    if constexpr (std::is_same_v<T, double>) {
      if (!v->is_number()) throw ValidationError(path_, "must be a number");
      value = v->get<double>();
    } else {
      value = static_cast<T>(integer(*v, "v", path_));
    }
  }

  std::int64_t integer(const json& v, const char* key, std::string name = {}) const {
    if (name.empty()) name = field(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
    }
    throw ValidationError(name, "must be an integer");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    if (node_ == nullptr) return nullptr;
    const auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }

  const json* node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void apply_env(json& root) {
  const std::string prefix = kEnvPrefix;
  std::vector<std::pair<std::string, std::string>> vars;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string entry(*e);
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    vars.emplace_back(entry.substr(0, eq), entry.substr(eq + 1));
  }
  // environ order is unspecified; sort so overrides apply reproducibly.
  std::sort(vars.begin(), vars.end());
  for (const auto& [name, value] : vars) {
    std::vector<std::string> parts;
    std::string rest = name.substr(prefix.size());
    for (std::size_t pos; (pos = rest.find("__")) != std::string::npos;) {
      parts.push_back(lower(rest.substr(0, pos)));
      rest = rest.substr(pos + 2);
    }
    parts.push_back(lower(rest));
    json* node = &root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->contains(parts[i])) (*node)[parts[i]] = json::object();
      node = &(*node)[parts[i]];
      if (!node->is_object()) throw ValidationError(name, "does not name a config key");
    }
    json parsed = json::parse(value, nullptr, false);
    (*node)[parts.back()] = parsed.is_discarded() ? json(value) : parsed;
  }
}

template <class E>
E parse_enum(const std::string& text, const std::string& field,
             std::initializer_list<std::pair<const char*, E>> options) {
  std::string allowed;
  for (const auto& [name, value] : options) {
    if (text == name) return value;
    allowed += allowed.empty() ? name : std::string(" | ") + name;
  }
  throw ValidationError(field, "must be one of " + allowed);
}

void positive(double v, const std::string& field) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(field, "must be finite and > 0");
}

SystemConfig from_json(const json& root) {
  SystemConfig cfg;
  Section top(&root, "");
  top.get("schema_version", cfg.schema_version);

  Section channel = top.sub("channel");
  int k = cfg.channel.num_clients();
  channel.get("num_clients", k);
  if (k < 1) throw ValidationError("channel.num_clients", "must be >= 1");
  double s2 = 0.5;
  std::vector<double> s2_list;
  if (const json* v = channel.raw("sigma2"); v != nullptr && v->is_array()) {
    const json holder = {{"sigma2", *v}};
    Section h(&holder, "channel");
    h.get("sigma2", s2_list);
    if (static_cast<int>(s2_list.size()) != k) {
      throw ValidationError("channel.sigma2", "array length must equal num_clients");
    }
  } else if (v != nullptr) {
    if (!v->is_number()) throw ValidationError("channel.sigma2", "must be a number or array");
    s2 = v->get<double>();
  }
  double awgn = cfg.channel.awgn_var;
  channel.get("awgn_var", awgn);
  channel.finish();
  cfg.channel = s2_list.empty() ? ChannelParams::homogeneous(k, s2, awgn)
                                : ChannelParams{s2_list, awgn};

  Section power = top.sub("power");
  power.get("max_power", cfg.power);
  power.get("grad_bound", cfg.grad_bound);
  power.finish();

  Section privacy = top.sub("privacy");
  privacy.get("alpha", cfg.alpha);
  privacy.get("eps_bar", cfg.eps_bar);
  privacy.finish();

  Section task = top.sub("task");
  std::string kind = "quadratic";
  task.get("kind", kind);
  cfg.task.kind = parse_enum<TaskKind>(
      kind, "task.kind",
      {{"quadratic", TaskKind::kQuadratic}, {"logistic_l2", TaskKind::kLogisticL2}});
  task.get("dim", cfg.task.dim);
  task.get("samples_per_client", cfg.task.samples_per_client);
  task.get("regularizer", cfg.task.regularizer);
  task.get("target_norm", cfg.task.target_norm);
  task.get("client_shift", cfg.task.client_shift);
  task.get("label_noise", cfg.task.label_noise);
  task.get("seed", cfg.task.seed);
  task.finish();
  cfg.task.num_clients = k;

  Section learning = top.sub("learning");
  learning.get("local_steps", cfg.learning.local_steps);
  learning.get("batch_size", cfg.learning.batch_size);
  learning.get("smoothness", cfg.learning.smoothness);
  learning.get("strong_convexity", cfg.learning.strong_convexity);
  learning.get("grad_sq_bound", cfg.learning.grad_sq_bound);
  learning.get("schedule_offset", cfg.learning.schedule_offset);
  learning.get("init_gap", cfg.learning.init_gap);
  learning.get("certify_rounds", cfg.learning.certify_rounds);
  learning.get("headroom", cfg.learning.headroom);
  learning.finish();

  Section opt = top.sub("optimizer");
  opt.get("lambda1", cfg.optimizer.lambda1);
  opt.get("lambda2", cfg.optimizer.lambda2);
  opt.get("gamma_bar", cfg.optimizer.gamma_bar);
  opt.get("bisection_tol", cfg.optimizer.bisection_tol);
  opt.get("bisection_max_iters", cfg.optimizer.bisection_max_iters);
  std::string idle_rho = "closed_form";
  opt.get("idle_rho", idle_rho);
  cfg.optimizer.idle_rho = parse_enum<IdleRhoMethod>(
      idle_rho, "optimizer.idle_rho",
      {{"closed_form", IdleRhoMethod::kClosedForm}, {"numerical", IdleRhoMethod::kNumerical}});
  opt.get("enforce_budget", cfg.optimizer.enforce_budget);
  std::string constant = "M2G";
  opt.get("gradient_constant", constant);
  cfg.optimizer.gradient_constant = parse_enum<GradientConstant>(
      constant, "optimizer.gradient_constant",
      {{"M2G", GradientConstant::kM2G}, {"MG2", GradientConstant::kMG2}});
  opt.finish();

  Section training = top.sub("training");
  std::string strategy = "idle";
  training.get("strategy", strategy);
  try {
    cfg.training.strategy = StrategySpec::parse(strategy);
  } catch (const ValidationError& e) {
    throw ValidationError("training.strategy", e.what());
  }
  training.get("seed", cfg.training.seed);
  training.get("num_seeds", cfg.training.num_seeds);
  std::string divisor = "realized";
  training.get("divisor_mode", divisor);
  cfg.training.divisor = parse_enum<DivisorMode>(
      divisor, "training.divisor_mode",
      {{"realized", DivisorMode::kRealized}, {"expected", DivisorMode::kExpected}});
  std::string form = "rescaled_gradient";
  training.get("update_form", form);
  cfg.training.update_form = parse_enum<UpdateForm>(
      form, "training.update_form",
      {{"rescaled_gradient", UpdateForm::kRescaledGradient},
       {"displacement", UpdateForm::kDisplacement}});
  training.get("rho", cfg.training.rho);
  training.get("tau", cfg.training.tau);
  training.get("normalize_to_bound", cfg.training.normalize_to_bound);
  training.finish();

  Section rdp = top.sub("rdp");
  rdp.get("alphas", cfg.rdp.alphas);
  rdp.get("participations", cfg.rdp.participations);
  rdp.get("ratios", cfg.rdp.ratios);
  rdp.finish();

  Section output = top.sub("output");
  std::string dir = cfg.output_dir.string();
  output.get("dir", dir);
  cfg.output_dir = dir;
  output.finish();

  top.finish();
  return cfg;
}

// Line and column (1-based) of a byte offset.
std::pair<std::size_t, std::size_t> locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

void SystemConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ValidationError("schema_version", "unsupported, expected " +
                                                std::to_string(kSchemaVersion));
  }
  channel.validate();
  positive(power, "power.max_power");
  positive(grad_bound, "power.grad_bound");
  if (alpha < 2) throw ValidationError("privacy.alpha", "must be an integer >= 2");
  positive(eps_bar, "privacy.eps_bar");
  task.validate();
  if (task.num_clients != channel.num_clients()) {
    throw ValidationError("task.num_clients", "must equal channel.num_clients");
  }

  if (learning.local_steps < 1) throw ValidationError("learning.local_steps", "must be >= 1");
  if (learning.batch_size < 0) throw ValidationError("learning.batch_size", "must be >= 0");
  if (learning.certify_rounds < 1) {
    throw ValidationError("learning.certify_rounds", "must be >= 1");
  }
  if (!(learning.headroom >= 1.0)) throw ValidationError("learning.headroom", "must be >= 1");
  const auto opt_positive = [](const std::optional<double>& v, const char* field) {
    if (v) positive(*v, field);
  };
  opt_positive(learning.smoothness, "learning.smoothness");
  opt_positive(learning.strong_convexity, "learning.strong_convexity");
  opt_positive(learning.grad_sq_bound, "learning.grad_sq_bound");
  opt_positive(learning.schedule_offset, "learning.schedule_offset");
  if (learning.init_gap && !(*learning.init_gap >= 0.0)) {
    throw ValidationError("learning.init_gap", "must be >= 0");
  }

  if (!(optimizer.lambda1 >= 0.0)) throw ValidationError("optimizer.lambda1", "must be >= 0");
  if (!(optimizer.lambda2 >= 0.0)) throw ValidationError("optimizer.lambda2", "must be >= 0");
  if (!(optimizer.lambda1 + optimizer.lambda2 > 0.0)) {
    throw ValidationError("optimizer.lambda1", "lambda1 + lambda2 must be > 0");
  }
  positive(optimizer.gamma_bar, "optimizer.gamma_bar");
  positive(optimizer.bisection_tol, "optimizer.bisection_tol");
  if (optimizer.bisection_max_iters < 1) {
    throw ValidationError("optimizer.bisection_max_iters", "must be >= 1");
  }
  if (!channel.is_homogeneous() && optimizer.idle_rho == IdleRhoMethod::kClosedForm) {
    throw ValidationError("channel.sigma2",
                          "closed-form optimizer paths assume a homogeneous "
                          "channel scale; set optimizer.idle_rho to numerical");
  }

  if (training.num_seeds < 1) throw ValidationError("training.num_seeds", "must be >= 1");
  const StrategySpec& s = training.strategy;
  if (s.mode == Unreliable::kMixed && !(s.portion >= 0.0 && s.portion <= 1.0)) {
    throw ValidationError("training.strategy", "mixed portion must lie in [0, 1]");
  }
  if (training.tau && *training.tau < 0) throw ValidationError("training.tau", "must be >= 0");
  if (training.rho) {
    const double cap = power / (grad_bound * grad_bound);
    if (!(*training.rho > 0.0 && *training.rho <= cap)) {
      throw ValidationError("training.rho", "must lie in (0, P/W^2]");
    }
    if (s.baseline != Baseline::kHMinBased &&
        expected_participants(*training.rho, channel, power, grad_bound) < 1.0) {
      throw ValidationError("training.rho", "degenerate participation: K_t(rho) < 1");
    }
  }

  for (int a : rdp.alphas) {
    if (a < 2) throw ValidationError("rdp.alphas", "entries must be integers >= 2");
  }
  for (double p : rdp.participations) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("rdp.participations", "entries must lie in [0, 1]");
    }
  }
  for (double r : rdp.ratios) positive(r, "rdp.ratios");
  if (output_dir.empty()) throw ValidationError("output.dir", "must not be empty");
}

SystemConfig parse_config(const std::string& text, const std::string& origin,
                          bool use_env) {
  json root = json::object();
  const bool blank = std::all_of(text.begin(), text.end(), [](unsigned char c) {
    return std::isspace(c) != 0;
  });
  if (!blank) {
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      const auto [line, col] = locate(text, e.byte == 0 ? 0 : e.byte - 1);
      throw ParseError(origin, line, col, e.what());
    }
  }
  if (use_env) apply_env(root);
  SystemConfig cfg = from_json(root);
  cfg.validate();
  return cfg;
}

SystemConfig load_config(const std::filesystem::path& path, bool use_env) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string(), use_env);
}

std::string default_config_json() {
  const SystemConfig d;
  const json j = {
      {"schema_version", kSchemaVersion},
      {"channel", {{"num_clients", d.channel.num_clients()},
                   {"sigma2", d.channel.sigma2.front()},
                   {"awgn_var", d.channel.awgn_var}}},
      {"power", {{"max_power", d.power}, {"grad_bound", d.grad_bound}}},
      {"privacy", {{"alpha", d.alpha}, {"eps_bar", d.eps_bar}}},
      {"task", {{"kind", "quadratic"},
                {"dim", d.task.dim},
                {"samples_per_client", d.task.samples_per_client},
                {"regularizer", d.task.regularizer},
                {"target_norm", d.task.target_norm},
                {"client_shift", d.task.client_shift},
                {"label_noise", d.task.label_noise},
                {"seed", d.task.seed}}},
      {"learning", {{"local_steps", d.learning.local_steps},
                    {"batch_size", d.learning.batch_size},
                    {"smoothness", nullptr},
                    {"strong_convexity", nullptr},
                    {"grad_sq_bound", nullptr},
                    {"schedule_offset", nullptr},
                    {"init_gap", nullptr},
                    {"certify_rounds", d.learning.certify_rounds},
                    {"headroom", d.learning.headroom}}},
      {"optimizer", {{"lambda1", d.optimizer.lambda1},
                     {"lambda2", d.optimizer.lambda2},
                     {"gamma_bar", d.optimizer.gamma_bar},
                     {"bisection_tol", d.optimizer.bisection_tol},
                     {"bisection_max_iters", d.optimizer.bisection_max_iters},
                     {"idle_rho", "closed_form"},
                     {"enforce_budget", d.optimizer.enforce_budget},
                     {"gradient_constant", "M2G"}}},
      {"training", {{"strategy", "idle"},
                    {"seed", d.training.seed},
                    {"num_seeds", d.training.num_seeds},
                    {"divisor_mode", "realized"},
                    {"update_form", "rescaled_gradient"},
                    {"rho", nullptr},
                    {"tau", nullptr},
                    {"normalize_to_bound", false}}},
      {"rdp", {{"alphas", d.rdp.alphas},
               {"participations", d.rdp.participations},
               {"ratios", d.rdp.ratios}}},
      {"output", {{"dir", d.output_dir.string()}}},
  };
  return j.dump(2) + "\n";
}

double certify_gradient_bound(const SyntheticTask& task,
                              const LearningParams& lp, int rounds,
                              double headroom, double grad_bound) {
  const int k = task.num_clients();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(task.dim());
  double worst = 0.0;
  Stream unused(0);
  for (int t = 0; t <= rounds; ++t) {
    for (int c = 0; c < k; ++c) {
      worst = std::max(worst, task.client_gradient(c, theta).squaredNorm());
    }
    if (t == rounds) break;
    const double eta = step_size<double>(t, lp);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(task.dim());
    for (int c = 0; c < k; ++c) {
      const Eigen::VectorXd g =
          (local_update(theta, task, c, lp.local_steps, eta, 0, unused) - theta) / eta;
      mean += clip_gradient(g, grad_bound);
    }
    theta += eta * mean / k;
  }
  return headroom * worst;
}

ResolvedSystem resolve(const SystemConfig& config) {
  config.validate();
  ResolvedSystem sys;
  sys.config = config;
  auto task = std::make_shared<SyntheticTask>(SyntheticTask::generate(config.task));

  LearningParams lp;
  lp.smoothness = config.learning.smoothness.value_or(task->smoothness());
  lp.strong_convexity = config.learning.strong_convexity.value_or(task->strong_convexity());
  lp.schedule_offset = config.learning.schedule_offset.value_or(
      std::ceil((std::numbers::sqrt2 + 1.0) * lp.smoothness) + 1.0);
  lp.local_steps = config.learning.local_steps;
  lp.grad_bound = config.grad_bound;
  lp.model_dim = config.task.dim;
  // theta_0 = 0.
  lp.init_gap = config.learning.init_gap.value_or(task->optimum().squaredNorm());
  lp.grad_sq_bound = 1.0;
  if (config.learning.grad_sq_bound) {
    lp.grad_sq_bound = *config.learning.grad_sq_bound;
  } else {
    lp.grad_sq_bound = certify_gradient_bound(*task, lp, config.learning.certify_rounds,
                                              config.learning.headroom, config.grad_bound);
  }
  lp.validate();

  OptimizerConfig opt = config.optimizer;
  opt.power = config.power;
  opt.grad_bound = config.grad_bound;
  opt.alpha = config.alpha;
  opt.eps_bar = config.eps_bar;
  opt.channel = config.channel;
  opt.learning = lp;
  opt.validate();

  sys.task = std::move(task);
  sys.optimizer = opt;
  return sys;
}

TrainingSetup make_training_setup(const ResolvedSystem& sys,
                                  const StrategySpec& strategy, double rho,
                                  std::int64_t tau, std::uint64_t seed) {
  TrainingSetup s;
  s.task = sys.task.get();
  s.channel = sys.config.channel;
  s.power = sys.config.power;
  s.grad_bound = sys.config.grad_bound;
  s.alpha = sys.config.alpha;
  s.strategy = strategy;
  s.rho = rho;
  s.tau = tau;
  s.seed = seed;
  s.learning = sys.optimizer.learning;
  s.batch_size = sys.config.learning.batch_size;
  s.divisor = sys.config.training.divisor;
  s.update_form = sys.config.training.update_form;
  s.normalize_to_bound = sys.config.training.normalize_to_bound;
  return s;
}

}  // namespace otafl
