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

#include "otafl/power_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "otafl/log.hpp"
#include "otafl/parallel.hpp"

namespace otafl {

namespace {

// Iteration counts beyond this are reported as this.
constexpr std::int64_t kTauCap = 1'000'000'000'000LL;

void require_homogeneous(const OptimizerConfig& cfg, const char* what) {
  if (!cfg.channel.is_homogeneous()) {
    throw ValidationError("channel.sigma2",
                          std::string(what) +
                              " assumes a homogeneous channel scale");
  }
}

void require_cdpb(const StrategySpec& s, const char* what) {
  if (s.baseline != Baseline::kNone) {
    throw ValidationError("strategy", std::string(what) +
                                          " is defined for noisy, idle and "
                                          "mixed only");
  }
}

double gradient_constant(const OptimizerConfig& cfg) {
  const LearningParams& lp = cfg.learning;
  const double m = lp.smoothness;
  const double g = lp.grad_sq_bound;
  return cfg.gradient_constant == GradientConstant::kM2G ? 4.0 * m * m * g
                                                         : 4.0 * m * g * g;
}

// The P5 objective up to the 6/gamma_bar factor.
double p5_objective(double rho, const StrategySpec& s,
                    const OptimizerConfig& cfg) {
  const ChannelContext ctx = optimizer_context(rho, s, cfg);
  const double k = ctx.expected_participants;
  return gradient_constant(cfg) / k + ctx.noise_var / (k * k * rho);
}

double clamp_to_cap(double rho, const OptimizerConfig& cfg, const char* what,
                    bool* clamped) {
  if (rho > cfg.rho_cap()) {
    log_warn(std::string(what) + " closed form exceeds P/W^2, clamped");
    *clamped = true;
    return cfg.rho_cap();
  }
  return rho;
}

// Largest tau with theorem-1 eps <= eps_bar. May be 0.
std::int64_t tau_eps_raw(const StrategySpec& s, const OptimizerConfig& cfg) {
  const PrivacyParams pp = privacy_at(cfg.rho_cap(), s, cfg);
  const double am1 = pp.alpha - 1.0;
  const double r = pp.grad_bound * pp.grad_bound / pp.noise_var;
  const double den =
      std::log(2.0) +
      pp.alpha * internal::log_mixture_term(pp.participation, am1 * r);
  if (!(den > 0.0)) throw NumericalError("tau_eps_max: non-positive denominator");
  const double raw = std::floor(cfg.eps_bar * am1 / den);
  if (!(raw < static_cast<double>(kTauCap))) return kTauCap;
  auto tau = static_cast<std::int64_t>(raw);
  // The floor above and theorem1_total_eps round differently; settle the
  // last unit against the latter so the inversion property is exact.
  while (tau > 0 && theorem1_total_eps(tau, pp) > cfg.eps_bar) --tau;
  while (theorem1_total_eps(tau + 1, pp) <= cfg.eps_bar) ++tau;
  return tau;
}

double derivative(const std::function<double(double)>& f, double x,
                  double h, double lo, double hi) {
  const double a = std::max(x - h, lo);
  const double b = std::min(x + h, hi);
  return (f(b) - f(a)) / (b - a);
}

}  // namespace

void OptimizerConfig::validate() const {
  const auto positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValidationError(field, "must be finite and > 0");
    }
  };
  if (!(lambda1 >= 0.0)) throw ValidationError("optimizer.lambda1", "must be >= 0");
  if (!(lambda2 >= 0.0)) throw ValidationError("optimizer.lambda2", "must be >= 0");
  if (!(lambda1 + lambda2 > 0.0)) {
    throw ValidationError("optimizer.lambda1", "lambda1 + lambda2 must be > 0");
  }
  positive(gamma_bar, "optimizer.gamma_bar");
  if (!(eps_bar > 0.0)) throw ValidationError("privacy.eps_bar", "must be > 0");
  positive(power, "power.max_power");
  positive(grad_bound, "power.grad_bound");
  if (alpha < 2) throw ValidationError("privacy.alpha", "must be an integer >= 2");
  positive(bisection_tol, "optimizer.bisection_tol");
  if (bisection_max_iters < 1) {
    throw ValidationError("optimizer.bisection_max_iters", "must be >= 1");
  }
  channel.validate();
  learning.validate();
  if (learning.grad_bound != grad_bound) {
    throw ValidationError("learning.grad_bound", "must equal power.grad_bound");
  }
}

ChannelContext optimizer_context(double rho, const StrategySpec& s,
                                 const OptimizerConfig& cfg) {
  // With no artificial noise, AWGN is all that is left; dropping it too
  // would send the search to rho -> 0 where sigma_z^2 / (K_t^2 rho) blows up.
  return make_channel_context(s.noisy_weight(), rho, cfg.channel, cfg.power,
                              cfg.grad_bound,
                              s.artificial_noise() ? NoiseAccounting::kArtificialOnly
                                                   : NoiseAccounting::kWithAwgn,
                              s.artificial_noise());
}

PrivacyParams privacy_at(double rho, const StrategySpec& s,
                         const OptimizerConfig& cfg) {
  PrivacyParams pp;
  pp.alpha = cfg.alpha;
  pp.grad_bound = cfg.grad_bound;
  pp.noise_var = cfg.channel.awgn_var;
  if (s.artificial_noise()) {
    pp.noise_var += expected_noise_power(s.noisy_weight(), rho, cfg.channel,
                                         cfg.power, cfg.grad_bound);
  }
  // Heterogeneous scales: account for the most exposed client.
  const double s2 =
      *std::max_element(cfg.channel.sigma2.begin(), cfg.channel.sigma2.end());
  pp.participation =
      participation_probability(rho, cfg.power, cfg.grad_bound, s2);
  return pp;
}

double rho_gamma(const StrategySpec& s, const OptimizerConfig& cfg) {
  require_cdpb(s, "rho_gamma");
  require_homogeneous(cfg, "rho_gamma");
  const double p = cfg.power;
  const double w2 = cfg.grad_bound * cfg.grad_bound;
  const double s2 = cfg.channel.sigma2.front();
  const double c = gradient_constant(cfg);
  double rho = 0.0;
  switch (s.mode) {
    case Unreliable::kNoisy: {
      const double an = c - w2;
      if (!(an > -2.0)) {
        throw ValidationError("learning.grad_sq_bound",
                              "noisy rho_gamma needs 4M^2G - W^2 > -2");
      }
      rho = p * s2 * (std::sqrt(4.0 * an + 9.0) - 1.0) / (w2 * (an + 2.0));
      break;
    }
    case Unreliable::kIdle: {
      const double ai = c / w2;
      rho = p * s2 * (std::sqrt(4.0 * ai + 1.0) - 1.0) / (ai * w2);
      break;
    }
    case Unreliable::kMixed: {
      rho = golden_section_minimize(
                [&](double r) { return p5_objective(r, s, cfg); },
                cfg.rho_floor(), cfg.rho_cap())
                .x;
      break;
    }
  }
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw NumericalError("rho_gamma: non-positive result");
  }
  bool clamped = false;
  return clamp_to_cap(rho, cfg, "rho_gamma", &clamped);
}

std::int64_t tau_gamma_min(const StrategySpec& s, const OptimizerConfig& cfg) {
  const double rho = rho_gamma(s, cfg);
  const double value = 6.0 / cfg.gamma_bar * p5_objective(rho, s, cfg);
  const double tau = std::ceil(value);
  if (!(tau < static_cast<double>(kTauCap))) return kTauCap;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(tau));
}

std::int64_t tau_eps_max(const StrategySpec& s, const OptimizerConfig& cfg) {
  const std::int64_t tau = tau_eps_raw(s, cfg);
  if (tau < 1) throw InfeasibleError(1, tau);
  return tau;
}

FeasibleSet feasible_set(const StrategySpec& s, const OptimizerConfig& cfg) {
  const FeasibleSet set{tau_gamma_min(s, cfg), tau_eps_raw(s, cfg)};
  if (set.tau_max < 1 || set.tau_min > set.tau_max) {
    throw InfeasibleError(set.tau_min, set.tau_max);
  }
  return set;
}

std::int64_t feasible_extent(const StrategySpec& s,
                             const OptimizerConfig& cfg) {
  return tau_eps_raw(s, cfg) - tau_gamma_min(s, cfg) + 1;
}

UtilityTerms utility_terms(double rho, std::int64_t tau, const StrategySpec& s,
                           const OptimizerConfig& cfg) {
  if (tau < 1) throw ValidationError("tau", "must be >= 1");
  UtilityTerms terms;
  terms.gamma = gamma_approx(tau, rho, cfg.learning, optimizer_context(rho, s, cfg));
  const PrivacyParams pp = privacy_at(rho, s, cfg);
  terms.eps = s.baseline == Baseline::kIndependentSampling
                  ? static_cast<double>(tau) * gaussian_round_eps(pp)
                  : theorem1_total_eps(tau, pp);
  terms.value = cfg.lambda1 * terms.gamma + cfg.lambda2 * terms.eps;
  return terms;
}

RhoSolution rho_opt_idle(std::int64_t tau, const OptimizerConfig& cfg) {
  require_homogeneous(cfg, "rho_opt_idle");
  if (tau < 1) throw ValidationError("tau", "must be >= 1");
  const LearningParams& lp = cfg.learning;
  const double p = cfg.power;
  const double w2 = cfg.grad_bound * cfg.grad_bound;
  const double s2 = cfg.channel.sigma2.front();
  const double t2 = static_cast<double>(tau) * static_cast<double>(tau);
  const double m2g = lp.smoothness * lp.smoothness * lp.grad_sq_bound;

  const auto closed_form = [&](double k) {
    const double a = cfg.lambda1 / (cfg.lambda2 * t2 * k * w2);
    const double b = 4.0 * cfg.lambda1 * m2g / (cfg.lambda2 * t2 * k);
    const double radicand_den = w2 * (cfg.alpha - 1) / (2.0 * p * s2) + b - 1.0;
    if (!(radicand_den > 0.0)) throw NonPositiveRadicand(radicand_den);
    return 2.0 * p * s2 / w2 * std::sqrt(a / radicand_den);
  };

  RhoSolution out;
  double k = cfg.channel.num_clients();
  double rho = closed_form(k);
  for (int it = 1; it <= 100; ++it) {
    k = expected_participants(std::min(rho, cfg.rho_cap()), cfg.channel, p,
                              cfg.grad_bound);
    const double next = closed_form(k);
    out.iterations = it;
    const bool done = std::abs(next - rho) < 1e-9;
    rho = next;
    if (done) {
      out.rho = clamp_to_cap(rho, cfg, "rho_opt_idle", &out.clamped);
      return out;
    }
  }
  log_warn("rho_opt_idle: fixed point did not settle, using numerical minimizer");
  return rho_opt_numeric(tau, StrategySpec::idle(), cfg);
}

RhoSolution rho_opt_bisection(std::int64_t tau, const StrategySpec& s,
                              const OptimizerConfig& cfg) {
  const double lo0 = cfg.rho_floor();
  const double hi0 = cfg.rho_cap();
  const double h = 1e-6 * cfg.rho_cap();
  const std::function<double(double)> f = [&](double r) {
    return utility(r, tau, s, cfg);
  };
  const auto slope = [&](double x) { return derivative(f, x, h, lo0, hi0); };

  RhoSolution out;
  out.method = RhoMethod::kBisection;
  if (slope(lo0) >= 0.0 || slope(hi0) <= 0.0) {
    out.method = RhoMethod::kBoundary;
    out.rho = f(lo0) <= f(hi0) ? lo0 : hi0;
    return out;
  }
  double lo = lo0;
  double hi = hi0;
  while ((hi - lo) / 2.0 >= cfg.bisection_tol) {
    if (out.iterations >= cfg.bisection_max_iters) throw MaxItersExceeded(lo, hi);
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++out.iterations;
  }
  out.rho = 0.5 * (lo + hi);
  return out;
}

RhoSolution rho_opt_noisy(std::int64_t tau, const OptimizerConfig& cfg) {
  return rho_opt_bisection(tau, StrategySpec::noisy(), cfg);
}

RhoSolution rho_opt_numeric(std::int64_t tau, const StrategySpec& s,
                            const OptimizerConfig& cfg) {
  const ScalarMinimum m = golden_section_minimize(
      [&](double r) { return utility(r, tau, s, cfg); }, cfg.rho_floor(),
      cfg.rho_cap());
  RhoSolution out;
  out.rho = m.x;
  out.method = RhoMethod::kGoldenSection;
  out.iterations = m.iterations;
  return out;
}

std::optional<std::pair<double, double>> budget_interval(
    std::int64_t tau, const StrategySpec& s, const OptimizerConfig& cfg) {
  // The ledger sums per-round terms, which can land an ulp above the
  // closed-form total; keep that much room under eps_bar.
  const double eps_cap = cfg.eps_bar * (1.0 - 1e-12);
  const auto ok = [&](double r) {
    const UtilityTerms t = utility_terms(r, tau, s, cfg);
    return t.gamma <= cfg.gamma_bar && t.eps <= eps_cap;
  };
  const double lo = cfg.rho_floor();
  const double hi = cfg.rho_cap();
  constexpr int kGrid = 1024;
  const auto at = [&](int i) { return lo + (hi - lo) * i / kGrid; };
  int first = -1;
  int last = -1;
  for (int i = 0; i <= kGrid; ++i) {
    if (ok(at(i))) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) return std::nullopt;
  // Refine each edge between its feasible and infeasible neighbours.
  const auto refine = [&](double good, double bad) {
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (good + bad);
      if (ok(mid)) {
        good = mid;
      } else {
        bad = mid;
      }
    }
    return good;
  };
  const double left = first == 0 ? lo : refine(at(first), at(first - 1));
  const double right = last == kGrid ? hi : refine(at(last), at(last + 1));
  return std::make_pair(left, right);
}

std::optional<RhoSolution> stage_two_rho(std::int64_t tau,
                                         const StrategySpec& s,
                                         const OptimizerConfig& cfg) {
  RhoSolution sol;
  if (s.baseline != Baseline::kNone) {
    sol = rho_opt_numeric(tau, s, cfg);
  } else if (s.mode == Unreliable::kIdle &&
             cfg.idle_rho == IdleRhoMethod::kClosedForm) {
    try {
      sol = rho_opt_idle(tau, cfg);
    } catch (const NonPositiveRadicand& e) {
      log_info(std::string("tau=") + std::to_string(tau) + ": " + e.what() +
               ", using numerical minimizer");
      sol = rho_opt_numeric(tau, s, cfg);
    }
  } else if (s.mode == Unreliable::kIdle) {
    sol = rho_opt_numeric(tau, s, cfg);
  } else {
    sol = rho_opt_bisection(tau, s, cfg);
  }
  // Baselines are not held to the budget; the noise-free one cannot meet it.
  if (!cfg.enforce_budget || s.baseline != Baseline::kNone) return sol;
  const auto interval = budget_interval(tau, s, cfg);
  if (!interval) return std::nullopt;
  const double clamped = std::clamp(sol.rho, interval->first, interval->second);
  if (clamped != sol.rho) {
    sol.rho = clamped;
    sol.projected = true;
  }
  return sol;
}

PowerBalanceSolution two_stage_optimize(const StrategySpec& s,
                                        const OptimizerConfig& cfg) {
  require_cdpb(s, "two_stage_optimize");
  const FeasibleSet set = feasible_set(s, cfg);
  const std::size_t n = static_cast<std::size_t>(set.size());
  struct Point {
    std::optional<RhoSolution> rho;
    double value = 0.0;
  };
  std::vector<Point> points(n);
  parallel_for(n, [&](std::size_t i) {
    const std::int64_t tau = set.tau_min + static_cast<std::int64_t>(i);
    points[i].rho = stage_two_rho(tau, s, cfg);
    if (points[i].rho) points[i].value = utility(points[i].rho->rho, tau, s, cfg);
  });

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < n; ++i) {
    if (!points[i].rho) continue;
    // One rho per tau and ascending tau order, so ties fall to the smaller tau.
    if (!best || points[i].value < points[*best].value) {
      best = i;
    }
  }
  if (!best) throw InfeasibleError(set.tau_min, set.tau_max);

  PowerBalanceSolution sol;
  sol.rho_opt = points[*best].rho->rho;
  sol.tau_opt = set.tau_min + static_cast<std::int64_t>(*best);
  sol.utility = points[*best].value;
  sol.feasible = set;
  sol.strategy = s;
  sol.method = points[*best].rho->method;
  sol.projected = points[*best].rho->projected;
  return sol;
}

double baseline_rho(Baseline baseline, const OptimizerConfig& cfg,
                    std::int64_t tau, const GainDraw* gains) {
  switch (baseline) {
    case Baseline::kGammaBased:
      return rho_gamma(StrategySpec::idle(), cfg);
    case Baseline::kHMinBased: {
      if (gains == nullptr || gains->gains.size() == 0) {
        throw ValidationError("gains", "h_min_based needs a gain draw");
      }
      const double h = gains->gains.minCoeff();
      if (!(h > 0.0)) {
        throw ValidationError("gains", "h_min_based with zero minimum gain");
      }
      return cfg.power * h / (cfg.grad_bound * cfg.grad_bound);
    }
    case Baseline::kNoiseFree:
    case Baseline::kIndependentSampling: {
      // IS differs from idle only in its accountant, so it shares idle's rho.
      const StrategySpec s = baseline == Baseline::kNoiseFree
                                 ? StrategySpec::baseline_of(baseline)
                                 : StrategySpec::idle();
      const auto sol = stage_two_rho(tau, s, cfg);
      if (!sol) throw InfeasibleError(tau, tau);
      return sol->rho;
    }
    case Baseline::kNone:
      break;
  }
  throw ValidationError("baseline", "not a baseline");
}

ScalarMinimum golden_section_minimize(const std::function<double(double)>& f,
                                      double lo, double hi, double rel_tol,
                                      int max_iters) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  while (it < max_iters &&
         (b - a) > rel_tol * (std::abs(c) + std::abs(d)) + 1e-300) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
    ++it;
  }
  ScalarMinimum best{fc < fd ? c : d, std::min(fc, fd), it};
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx < best.fx) best = {x, fx, it};
  }
  return best;
}

}  // namespace otafl
