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

#include "otafl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "otafl/log.hpp"
#include "otafl/parallel.hpp"

namespace otafl {

namespace {

double rel_gap(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), std::numeric_limits<double>::min());
}

CheckResult at_most(std::string name, double measured, double tolerance,
                    std::string detail = {}) {
  return {std::move(name), measured, tolerance, measured <= tolerance, std::move(detail)};
}

// The P5 objective written out from the homogeneous closed forms, kept
// apart from the optimizer's own evaluation.
double p5_direct(double rho, bool noisy, const OptimizerConfig& cfg) {
  const double p = cfg.power;
  const double w2 = cfg.grad_bound * cfg.grad_bound;
  const double s2 = cfg.channel.sigma2.front();
  const double k = cfg.channel.num_clients();
  const double e = std::exp(-rho * w2 / (2.0 * p * s2));
  const double kt = k * e;
  const double noise = noisy ? k * (2.0 * p * s2 - rho * w2 * e) : k * 2.0 * p * s2 * e;
  const LearningParams& lp = cfg.learning;
  return 4.0 * lp.smoothness * lp.smoothness * lp.grad_sq_bound / kt +
         noise / (kt * kt * rho);
}

double argmin_p5(bool noisy, const OptimizerConfig& cfg) {
  return golden_section_minimize([&](double r) { return p5_direct(r, noisy, cfg); },
                                 cfg.rho_floor(), cfg.rho_cap())
      .x;
}

std::int64_t probe_tau(const OptimizerConfig& cfg) {
  try {
    const FeasibleSet set = feasible_set(StrategySpec::idle(), cfg);
    return set.tau_min + (set.tau_max - set.tau_min) / 2;
  } catch (const Error&) {
    return 50;
  }
}

struct ClosedFormGaps {
  double idle_gamma = 0.0;
  double noisy_gamma = 0.0;
  double idle_opt = 0.0;
  std::string idle_opt_note;
};

ClosedFormGaps closed_form_gaps(const OptimizerConfig& cfg) {
  ClosedFormGaps g;
  g.idle_gamma = rel_gap(rho_gamma(StrategySpec::idle(), cfg), argmin_p5(false, cfg));
  g.noisy_gamma = rel_gap(rho_gamma(StrategySpec::noisy(), cfg), argmin_p5(true, cfg));
  const std::int64_t tau = probe_tau(cfg);
  const double oracle =
      golden_section_minimize(
          [&](double r) { return utility(r, tau, StrategySpec::idle(), cfg); },
          cfg.rho_floor(), cfg.rho_cap())
          .x;
  try {
    g.idle_opt = rel_gap(rho_opt_idle(tau, cfg).rho, oracle);
  } catch (const NonPositiveRadicand& e) {
    g.idle_opt = std::numeric_limits<double>::infinity();
    g.idle_opt_note = e.what();
  }
  return g;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::filesystem::path prepare_out(const SystemConfig& cfg, const RunOptions& opts) {
  const std::filesystem::path dir = opts.out_dir.value_or(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create output directory: " + ec.message());
  return dir;
}

SystemConfig with_overrides(SystemConfig cfg, const RunOptions& opts) {
  if (opts.seed) cfg.training.seed = *opts.seed;
  if (opts.strategy) cfg.training.strategy = *opts.strategy;
  return cfg;
}

}  // namespace

std::string format_check(const CheckResult& c) {
  std::string line = std::string(c.pass ? "[PASS] " : "[FAIL] ") + c.name +
                     " measured=" + format_number(c.measured) +
                     " tolerance=" + format_number(c.tolerance);
  if (!c.detail.empty()) line += " (" + c.detail + ")";
  return line;
}

std::vector<CheckResult> check_closed_forms_at(const OptimizerConfig& cfg) {
  const ClosedFormGaps g = closed_form_gaps(cfg);
  return {at_most("closed_form.rho_gamma_idle", g.idle_gamma, 1e-4),
          at_most("closed_form.rho_gamma_noisy", g.noisy_gamma, 1e-4),
          at_most("closed_form.rho_opt_idle", g.idle_opt, 1e-4, g.idle_opt_note)};
}

std::vector<CheckResult> check_closed_forms(const OptimizerConfig& base) {
  const double ms[] = {0.5, 1.0, 2.0};
  const double gs[] = {0.1, 0.5, 1.0};
  const double s2s[] = {0.25, 0.5, 1.0};
  std::vector<OptimizerConfig> grid;
  for (double m : ms) {
    for (double g : gs) {
      for (double s2 : s2s) {
        OptimizerConfig cfg = base;
        cfg.learning.smoothness = m;
        cfg.learning.strong_convexity = 0.5 * m;
        cfg.learning.grad_sq_bound = g;
        cfg.learning.schedule_offset = std::ceil((std::numbers::sqrt2 + 1.0) * m) + 1.0;
        cfg.channel = ChannelParams::homogeneous(base.channel.num_clients(), s2,
                                                 base.channel.awgn_var);
        grid.push_back(cfg);
      }
    }
  }
  std::vector<ClosedFormGaps> gaps(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { gaps[i] = closed_form_gaps(grid[i]); });
  ClosedFormGaps worst;
  std::size_t within[3] = {0, 0, 0};
  for (const auto& g : gaps) {
    worst.idle_gamma = std::max(worst.idle_gamma, g.idle_gamma);
    worst.noisy_gamma = std::max(worst.noisy_gamma, g.noisy_gamma);
    worst.idle_opt = std::max(worst.idle_opt, g.idle_opt);
    within[0] += g.idle_gamma <= 1e-4;
    within[1] += g.noisy_gamma <= 1e-4;
    within[2] += g.idle_opt <= 1e-4;
  }
  const auto note = [&](std::size_t n) {
    return std::to_string(n) + "/" + std::to_string(grid.size()) + " grid points within tolerance";
  };
  return {at_most("closed_form.rho_gamma_idle", worst.idle_gamma, 1e-4, note(within[0])),
          at_most("closed_form.rho_gamma_noisy", worst.noisy_gamma, 1e-4, note(within[1])),
          at_most("closed_form.rho_opt_idle", worst.idle_opt, 1e-4, note(within[2]))};
}

std::vector<CheckResult> check_channel_statistics(const OptimizerConfig& cfg,
                                                  std::uint64_t seed, int rounds) {
  const double fracs[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  constexpr int kPoints = 5;
  const int k = cfg.channel.num_clients();
  const int d = cfg.learning.model_dim;
  // Gradients at the clipping bound, as the closed forms assume.
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
  g[0] = cfg.grad_bound;
  const std::vector<Eigen::VectorXd> updates(static_cast<std::size_t>(k), g);

  double count[kPoints] = {};
  double noisy_power[kPoints] = {};
  double idle_power[kPoints] = {};
  TransmitOptions options{cfg.power, cfg.grad_bound, true, seed};
  for (int r = 0; r < rounds; ++r) {
    const GainDraw gains = sample_gains(cfg.channel, seed, static_cast<std::uint64_t>(r));
    for (int i = 0; i < kPoints; ++i) {
      const double rho = fracs[i] * cfg.rho_cap();
      for (int which = 0; which < 2; ++which) {
        const TransmitPlan plan = build_transmit_plan(
            which == 0 ? StrategySpec::noisy() : StrategySpec::idle(), gains, updates, rho,
            options);
        double power = 0.0;
        for (int c = 0; c < k; ++c) {
          const TransmitEntry& e = plan.clients[static_cast<std::size_t>(c)];
          if (e.role == ClientRole::kReliable) {
            power += rho * d * e.noise_var;
            if (which == 1) count[i] += 1.0;
          } else if (e.role == ClientRole::kNoisy) {
            power += gains.gains[c] * d * e.noise_var;
          }
        }
        (which == 0 ? noisy_power : idle_power)[i] += power;
      }
    }
  }
  double worst_k = 0.0;
  double worst_n = 0.0;
  double worst_i = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double rho = fracs[i] * cfg.rho_cap();
    worst_k = std::max(worst_k, rel_gap(count[i] / rounds,
                                        expected_participants(rho, cfg.channel, cfg.power,
                                                              cfg.grad_bound)));
    worst_n = std::max(worst_n, rel_gap(noisy_power[i] / rounds,
                                        noise_power_noisy(rho, cfg.channel, cfg.power,
                                                          cfg.grad_bound)));
    worst_i = std::max(worst_i, rel_gap(idle_power[i] / rounds,
                                        noise_power_idle(rho, cfg.channel, cfg.power,
                                                         cfg.grad_bound)));
  }
  const std::string draws = std::to_string(static_cast<long long>(rounds) * k) + " draws";
  return {at_most("channel.expected_participants", worst_k, 0.01, draws),
          at_most("channel.noise_power_noisy", worst_n, 0.01, draws),
          at_most("channel.noise_power_idle", worst_i, 0.01, draws)};
}

std::vector<CheckResult> check_rdp_ordering(const RdpGrid& grid) {
  struct Cell {
    double oracle_excess = 0.0;
    double bound_deficit = 0.0;
    double identity = 0.0;
  };
  std::vector<std::tuple<int, double, double>> points;
  for (int a : grid.alphas) {
    for (double p : grid.participations) {
      for (double r : grid.ratios) points.emplace_back(a, p, r);
    }
  }
  std::vector<Cell> cells(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const auto [a, p, r] = points[i];
    PrivacyParams pp{static_cast<double>(a), 1.0, 1.0 / r, p};
    const double exact = subsampled_round_eps_exact(pp);
    const double bound = subsampled_round_eps_bound(pp);
    const double oracle = renyi_divergence_oracle(a, p, std::numbers::sqrt2, 1.0 / r);
    // The oracle carries 1e-6 relative quadrature error.
    cells[i].oracle_excess = exact > 0.0 ? (oracle - exact) / exact : oracle;
    cells[i].bound_deficit = exact - bound;
    for (std::int64_t tau : {1LL, 7LL, 100LL, 1000LL, 1000000LL}) {
      const double t1 = theorem1_total_eps(tau, pp);
      cells[i].identity =
          std::max(cells[i].identity, rel_gap(t1, static_cast<double>(tau) * bound));
    }
  });
  Cell worst{-std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), 0.0};
  for (const Cell& c : cells) {
    worst.oracle_excess = std::max(worst.oracle_excess, c.oracle_excess);
    worst.bound_deficit = std::max(worst.bound_deficit, c.bound_deficit);
    worst.identity = std::max(worst.identity, c.identity);
  }
  const std::string n = std::to_string(points.size()) + " grid points";
  return {at_most("rdp.oracle_le_exact", worst.oracle_excess, 1e-6,
                  n + ", measured = max (oracle - exact) / exact"),
          at_most("rdp.exact_le_bound", worst.bound_deficit, 0.0,
                  n + ", measured = max exact - bound"),
          at_most("rdp.theorem1_identity", worst.identity, 1e-12, n)};
}

CheckResult check_convergence_ordering(const ResolvedSystem& sys,
                                       const StrategySpec& strategy, int seeds,
                                       std::uint64_t first_seed) {
  const PowerBalanceSolution sol = two_stage_optimize(strategy, sys.optimizer);
  double sum = 0.0;
  for (int i = 0; i < seeds; ++i) {
    const TrainingSetup setup = make_training_setup(
        sys, strategy, sol.rho_opt, sol.tau_opt, first_seed + static_cast<std::uint64_t>(i));
    sum += run_training(setup).final_loss_weighted;
  }
  const double mean = sum / seeds;
  const OptimizerConfig& o = sys.optimizer;
  const ChannelContext ctx =
      make_channel_context(strategy.noisy_weight(), sol.rho_opt, o.channel, o.power,
                           o.grad_bound, NoiseAccounting::kWithAwgn, strategy.artificial_noise());
  const double bound = theorem2_bound(sol.tau_opt, sol.rho_opt, o.learning, ctx);
  return at_most("convergence.theorem2_" + strategy.name(), mean, bound,
                 std::to_string(seeds) + "-seed mean at rho=" + format_number(sol.rho_opt) +
                     " tau=" + std::to_string(sol.tau_opt) + ", tolerance = theorem2_bound");
}

std::vector<CheckResult> run_validation_suite(const ResolvedSystem& sys) {
  std::vector<CheckResult> out = check_closed_forms_at(sys.optimizer);
  for (auto& c : check_channel_statistics(sys.optimizer, sys.config.training.seed, 10000)) {
    out.push_back(std::move(c));
  }
  RdpGrid grid;
  grid.participations = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  for (auto& c : check_rdp_ordering(grid)) out.push_back(std::move(c));
  for (const StrategySpec& s : {StrategySpec::idle(), StrategySpec::noisy()}) {
    out.push_back(check_convergence_ordering(sys, s, 20, sys.config.training.seed));
  }
  return out;
}

AxisSpec AxisSpec::parse(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ValidationError("axis", "expected <name>=<comma list>");
  AxisSpec axis;
  axis.name = text.substr(0, eq);
  static const char* kNames[] = {"tau", "K", "P", "gamma_bar", "portion"};
  if (std::find_if(std::begin(kNames), std::end(kNames),
                   [&](const char* n) { return axis.name == n; }) == std::end(kNames)) {
    throw ValidationError("axis", "unknown axis '" + axis.name +
                                      "', expected tau | K | P | gamma_bar | portion");
  }
  std::string_view rest(text);
  rest.remove_prefix(eq + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ValidationError("axis", "bad value '" + std::string(item) + "'");
    }
    axis.values.push_back(v);
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (axis.values.empty()) throw ValidationError("axis", "no values given");
  return axis;
}

std::string strategy_slug(const StrategySpec& s) {
  std::string name = s.name();
  std::replace(name.begin(), name.end(), ':', '-');
  return name;
}

TrainingPlan plan_training(const ResolvedSystem& sys, const StrategySpec& strategy) {
  const OptimizerConfig& opt = sys.optimizer;
  const TrainingSection& tr = sys.config.training;
  TrainingPlan plan;
  if (strategy.baseline == Baseline::kNone) {
    if (tr.rho && tr.tau) return {*tr.rho, *tr.tau};
    if (tr.tau) {
      const auto sol = stage_two_rho(*tr.tau, strategy, opt);
      if (!sol) throw InfeasibleError(*tr.tau, *tr.tau);
      return {tr.rho.value_or(sol->rho), *tr.tau};
    }
    const PowerBalanceSolution sol = two_stage_optimize(strategy, opt);
    return {tr.rho.value_or(sol.rho_opt), sol.tau_opt};
  }
  plan.tau = tr.tau ? *tr.tau : two_stage_optimize(StrategySpec::idle(), opt).tau_opt;
  if (tr.rho) {
    plan.rho = *tr.rho;
  } else if (strategy.baseline == Baseline::kHMinBased) {
    // Re-derived every round from that round's gains.
    plan.rho = opt.rho_cap();
  } else {
    plan.rho = baseline_rho(strategy.baseline, opt, plan.tau);
  }
  return plan;
}

CsvTable optimize_table(const ResolvedSystem& sys, bool* all_feasible) {
  CsvTable table({"strategy", "tau_min", "tau_max", "rho_opt", "tau_opt", "utility", "status"});
  *all_feasible = true;
  for (const StrategySpec& s : {StrategySpec::noisy(), StrategySpec::idle()}) {
    try {
      const PowerBalanceSolution sol = two_stage_optimize(s, sys.optimizer);
      table.add_row({s.name(), format_number(sol.feasible.tau_min),
                     format_number(sol.feasible.tau_max), format_number(sol.rho_opt),
                     format_number(sol.tau_opt), format_number(sol.utility), "ok"});
    } catch (const InfeasibleError& e) {
      *all_feasible = false;
      table.add_row({s.name(), format_number(e.tau_min()), format_number(e.tau_max()), "", "",
                     "", "infeasible"});
    }
  }
  return table;
}

CsvTable trace_table(const TrainingResult& result) {
  CsvTable table({"t", "participants_count", "sigma_q2_realized", "loss_current",
                  "loss_weighted", "eps_cumulative"});
  for (const RoundTrace& r : result.rounds) {
    table.add_row({format_number(r.t),
                   format_number(static_cast<std::int64_t>(r.participants.size())),
                   format_number(r.sigma_q2_realized), format_number(r.loss_current),
                   format_number(r.loss_weighted), format_number(r.eps_cumulative)});
  }
  return table;
}

namespace {

using Row = std::vector<std::string>;

void emit(std::vector<Row>& rows, double x, const std::string& series,
          const std::string& metric, double value) {
  rows.push_back({format_number(x), series, metric, format_number(value)});
}

// One rho_tau per CDPB strategy, as the two ops define it (no budget
// projection), plus the baselines that have a rho at this tau.
void tau_point(const ResolvedSystem& sys, std::int64_t tau, std::vector<Row>& rows) {
  const OptimizerConfig& opt = sys.optimizer;
  const double x = static_cast<double>(tau);
  const auto curve = [&](const std::string& series, const StrategySpec& s, double rho) {
    const UtilityTerms t = utility_terms(rho, tau, s, opt);
    emit(rows, x, series, "rho", rho);
    emit(rows, x, series, "gamma", t.gamma);
    emit(rows, x, series, "eps", t.eps);
    emit(rows, x, series, "utility", t.value);
  };
  double idle_rho = 0.0;
  try {
    idle_rho = rho_opt_idle(tau, opt).rho;
  } catch (const NonPositiveRadicand&) {
    idle_rho = rho_opt_numeric(tau, StrategySpec::idle(), opt).rho;
  }
  curve("idle", StrategySpec::idle(), idle_rho);
  curve("noisy", StrategySpec::noisy(), rho_opt_noisy(tau, opt).rho);
  curve("gamma_based", StrategySpec::idle(), rho_gamma(StrategySpec::idle(), opt));
  curve("is_based", StrategySpec::baseline_of(Baseline::kIndependentSampling), idle_rho);
  const StrategySpec nf = StrategySpec::baseline_of(Baseline::kNoiseFree);
  curve("noise_free", nf, rho_opt_numeric(tau, nf, opt).rho);
}

void feasibility_point(const OptimizerConfig& opt, double x, std::vector<Row>& rows) {
  std::optional<double> utility_of[2];
  std::int64_t extent[2] = {0, 0};
  const StrategySpec specs[2] = {StrategySpec::idle(), StrategySpec::noisy()};
  for (int i = 0; i < 2; ++i) {
    const std::string name = specs[i].name();
    extent[i] = feasible_extent(specs[i], opt);
    const std::int64_t tau_min = tau_gamma_min(specs[i], opt);
    emit(rows, x, name, "tau_min", static_cast<double>(tau_min));
    emit(rows, x, name, "tau_max", static_cast<double>(tau_min + extent[i] - 1));
    emit(rows, x, name, "extent", static_cast<double>(extent[i]));
    try {
      const PowerBalanceSolution sol = two_stage_optimize(specs[i], opt);
      utility_of[i] = sol.utility;
      emit(rows, x, name, "rho_opt", sol.rho_opt);
      emit(rows, x, name, "tau_opt", static_cast<double>(sol.tau_opt));
      emit(rows, x, name, "utility", sol.utility);
    } catch (const InfeasibleError&) {
    }
  }
  emit(rows, x, "idle-noisy", "cardinality_disparity",
       static_cast<double>(extent[0] - extent[1]));
  if (utility_of[0] && utility_of[1]) {
    emit(rows, x, "noisy-idle", "utility_disparity", *utility_of[1] - *utility_of[0]);
  }
}

}  // namespace

CsvTable sweep_table(const ResolvedSystem& sys, const AxisSpec& axis) {
  CsvTable table({"axis_value", "series", "metric", "value"});
  const std::size_t n = axis.values.size();
  std::vector<std::vector<Row>> points(n);

  if (axis.name == "portion") {
    const OptimizerConfig& opt = sys.optimizer;
    const PowerBalanceSolution base = two_stage_optimize(StrategySpec::idle(), opt);
    const TrainingSection& tr = sys.config.training;
    const auto train_series = [&](const StrategySpec& s, double x, std::vector<Row>& rows,
                                  const std::string& series) {
      std::vector<double> loss;
      std::vector<double> eps;
      for (int i = 0; i < tr.num_seeds; ++i) {
        const TrainingResult r = run_training(make_training_setup(
            sys, s, base.rho_opt, base.tau_opt, tr.seed + static_cast<std::uint64_t>(i)));
        loss.push_back(r.final_loss_weighted);
        eps.push_back(r.ledger.total_eps());
      }
      emit(rows, x, series, "loss_weighted_median", median(loss));
      emit(rows, x, series, "eps_total_median", median(eps));
      emit(rows, x, series, "utility", utility(base.rho_opt, base.tau_opt, s, opt));
    };
    parallel_for(n, [&](std::size_t i) {
      const double w = axis.values[i];
      if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("axis", "portion must lie in [0, 1]");
      train_series(StrategySpec::mixed(w), w, points[i], "mixed");
    });
    std::vector<Row> refs;
    train_series(StrategySpec::idle(), 0.0, refs, "idle");
    train_series(StrategySpec::noisy(), 1.0, refs, "noisy");
    points.push_back(std::move(refs));
  } else {
    parallel_for(n, [&](std::size_t i) {
      const double v = axis.values[i];
      OptimizerConfig opt = sys.optimizer;
      if (axis.name == "tau") {
        if (!(v >= 1.0) || std::floor(v) != v) throw ValidationError("axis", "tau must be an integer >= 1");
        tau_point(sys, static_cast<std::int64_t>(v), points[i]);
        return;
      }
      if (axis.name == "K") {
        if (!(v >= 1.0) || std::floor(v) != v) throw ValidationError("axis", "K must be an integer >= 1");
        opt.channel = ChannelParams::homogeneous(static_cast<int>(v), opt.channel.sigma2.front(),
                                                 opt.channel.awgn_var);
      } else if (axis.name == "P") {
        opt.power = v;
      } else {
        opt.gamma_bar = v;
      }
      opt.validate();
      feasibility_point(opt, v, points[i]);
    });
  }
  for (auto& rows : points) {
    for (auto& row : rows) table.add_row(std::move(row));
  }
  return table;
}

CsvTable rdp_table(const RdpGrid& grid) {
  CsvTable table({"alpha", "participation", "ratio", "gaussian", "exact", "bound", "oracle"});
  std::vector<std::tuple<int, double, double>> points;
  for (int a : grid.alphas) {
    for (double p : grid.participations) {
      for (double r : grid.ratios) points.emplace_back(a, p, r);
    }
  }
  std::vector<Row> rows(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const auto [a, p, r] = points[i];
    const PrivacyParams pp{static_cast<double>(a), 1.0, 1.0 / r, p};
    rows[i] = {format_number(static_cast<std::int64_t>(a)), format_number(p), format_number(r),
               format_number(gaussian_round_eps(pp)),
               format_number(subsampled_round_eps_exact(pp)),
               format_number(subsampled_round_eps_bound(pp)),
               format_number(renyi_divergence_oracle(a, p, std::numbers::sqrt2, 1.0 / r))};
  });
  for (auto& row : rows) table.add_row(std::move(row));
  return table;
}

int cmd_optimize(const SystemConfig& cfg, const RunOptions& opts, std::ostream& log) {
  const std::filesystem::path dir = prepare_out(cfg, opts);
  const ResolvedSystem sys = resolve(with_overrides(cfg, opts));
  bool feasible = true;
  const CsvTable table = optimize_table(sys, &feasible);
  table.write(dir / "optimize.csv");
  for (const auto& row : table.rows()) {
    log << row[0] << ": tau in [" << row[1] << ", " << row[2] << "]";
    if (row[6] == "ok") log << " rho_opt=" << row[3] << " tau_opt=" << row[4] << " utility=" << row[5];
    log << " " << row[6] << "\n";
  }
  return static_cast<int>(feasible ? ExitCode::kOk : ExitCode::kValidation);
}

int cmd_train(const SystemConfig& cfg_in, const RunOptions& opts, std::ostream& log) {
  const std::filesystem::path dir = prepare_out(cfg_in, opts);
  const SystemConfig cfg = with_overrides(cfg_in, opts);
  const ResolvedSystem sys = resolve(cfg);
  const StrategySpec strategy = cfg.training.strategy;
  const TrainingPlan plan = plan_training(sys, strategy);
  const int seeds = opts.seed ? 1 : cfg.training.num_seeds;
  for (int i = 0; i < seeds; ++i) {
    const std::uint64_t seed = cfg.training.seed + static_cast<std::uint64_t>(i);
    const TrainingResult result =
        run_training(make_training_setup(sys, strategy, plan.rho, plan.tau, seed));
    const std::filesystem::path file =
        dir / ("train_" + strategy_slug(strategy) + "_seed" + std::to_string(seed) + ".csv");
    trace_table(result).write(file);
    log << strategy.name() << " seed " << seed << ": rho=" << format_number(plan.rho)
        << " tau=" << plan.tau << " loss_weighted=" << format_number(result.final_loss_weighted)
        << " eps=" << format_number(result.ledger.total_eps())
        << " empty_rounds=" << result.empty_rounds << " -> " << file.string() << "\n";
  }
  return 0;
}

int cmd_sweep(const SystemConfig& cfg, const RunOptions& opts, std::ostream& log) {
  if (!opts.axis) throw ValidationError("axis", "sweep needs --axis <name>=<comma list>");
  const std::filesystem::path dir = prepare_out(cfg, opts);
  const ResolvedSystem sys = resolve(with_overrides(cfg, opts));
  const CsvTable table = sweep_table(sys, *opts.axis);
  const std::filesystem::path file = dir / ("sweep_" + opts.axis->name + ".csv");
  table.write(file);
  log << table.rows().size() << " rows -> " << file.string() << "\n";
  return 0;
}

int cmd_rdp(const SystemConfig& cfg, const RunOptions& opts, std::ostream& log) {
  const std::filesystem::path dir = prepare_out(cfg, opts);
  const CsvTable table = rdp_table(cfg.rdp);
  table.write(dir / "rdp.csv");
  log << table.rows().size() << " rows -> " << (dir / "rdp.csv").string() << "\n";
  return 0;
}

int cmd_validate(const SystemConfig& cfg, const RunOptions& opts, std::ostream& log) {
  const std::filesystem::path dir = prepare_out(cfg, opts);
  const ResolvedSystem sys = resolve(with_overrides(cfg, opts));
  const std::vector<CheckResult> checks = run_validation_suite(sys);
  CsvTable table({"check", "measured", "tolerance", "status", "detail"});
  bool all = true;
  for (const CheckResult& c : checks) {
    log << format_check(c) << "\n";
    table.add_row({c.name, format_number(c.measured), format_number(c.tolerance),
                   c.pass ? "pass" : "fail", c.detail});
    all = all && c.pass;
  }
  table.write(dir / "validate.csv");
  return static_cast<int>(all ? ExitCode::kOk : ExitCode::kNumerical);
}

}  // namespace otafl
