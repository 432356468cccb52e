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

#include "otafl/fl_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "otafl/log.hpp"
#include "otafl/parallel.hpp"

namespace otafl {

Eigen::VectorXd clip_gradient(const Eigen::VectorXd& g, double bound) {
  const double norm = g.norm();
  if (norm <= bound) return g;
  return g * (bound / norm);
}

Eigen::VectorXd local_update(const Eigen::VectorXd& theta,
                             const SyntheticTask& task, int client,
                             int local_steps, double eta, int batch_size,
                             Stream& rng) {
  Eigen::VectorXd local = theta;
  const int n = task.samples(client);
  const bool full = batch_size <= 0 || batch_size >= n;
  std::vector<int> rows(static_cast<std::size_t>(n));
  for (int step = 0; step < local_steps; ++step) {
    if (full) {
      local -= eta * task.client_gradient(client, local);
      continue;
    }
    // Partial Fisher-Yates: the first batch_size slots are the sample.
    std::iota(rows.begin(), rows.end(), 0);
    for (int i = 0; i < batch_size; ++i) {
      const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)]);
    }
    local -= eta * task.client_gradient(
                       client, local,
                       std::span<const int>(rows.data(), static_cast<std::size_t>(batch_size)));
  }
  return local;
}

TransmitPlan build_transmit_plan(const StrategySpec& strategy,
                                 const GainDraw& gains,
                                 std::span<const Eigen::VectorXd> updates,
                                 double rho, const TransmitOptions& options) {
  if (!(rho > 0.0)) throw ValidationError("rho", "must be > 0");
  if (updates.size() != static_cast<std::size_t>(gains.gains.size())) {
    throw ValidationError("updates", "one update per client required");
  }
  const double h_th = threshold(rho, options.power, options.grad_bound);
  TransmitPlan plan;
  plan.clients.resize(updates.size());
  for (std::size_t k = 0; k < updates.size(); ++k) {
    const double h = gains.gains[static_cast<Eigen::Index>(k)];
    const auto d = static_cast<double>(updates[k].size());
    TransmitEntry& e = plan.clients[k];
    if (h >= h_th) {
      e.role = ClientRole::kReliable;
      e.scale = rho / h;
      if (options.artificial_noise) {
        // Saturate P: the slack left by the gradient goes to noise.
        e.noise_var = std::max(0.0, (options.power * h / rho - updates[k].squaredNorm()) / d);
      }
      continue;
    }
    bool noisy = false;
    switch (strategy.mode) {
      case Unreliable::kNoisy: noisy = true; break;
      case Unreliable::kIdle: noisy = false; break;
      case Unreliable::kMixed: {
        Stream coin(options.seed, Purpose::kCoin, gains.round, k);
        noisy = coin.bernoulli(strategy.portion);
        break;
      }
    }
    if (noisy && options.artificial_noise) {
      e.role = ClientRole::kNoisy;
      e.scale = 1.0;
      e.noise_var = options.power / d;
    } else {
      e.role = ClientRole::kIdle;
    }
  }
  return plan;
}

AggregateResult aggregate(const TransmitPlan& plan, const GainDraw& gains,
                          std::span<const Eigen::VectorXd> updates, double rho,
                          double awgn_var, DivisorMode divisor,
                          double expected_participants, std::uint64_t seed) {
  const auto dim = updates.front().size();
  const auto d = static_cast<double>(dim);
  AggregateResult out;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd r(dim);
  double art = 0.0;
  const double sqrt_rho = std::sqrt(rho);
  for (std::size_t k = 0; k < plan.clients.size(); ++k) {
    const TransmitEntry& e = plan.clients[k];
    if (e.role == ClientRole::kIdle) continue;
    Stream noise(seed, Purpose::kClientNoise, gains.round, k);
    const double sd = std::sqrt(e.noise_var);
    for (Eigen::Index j = 0; j < dim; ++j) r[j] = sd * noise.normal();
    if (e.role == ClientRole::kReliable) {
      out.participants.push_back(static_cast<int>(k));
      y += sqrt_rho * (updates[k] + r);
      art += rho * d * e.noise_var;
    } else {
      const double h = gains.gains[static_cast<Eigen::Index>(k)];
      y += std::sqrt(h) * r;
      art += h * d * e.noise_var;
    }
  }
  if (awgn_var > 0.0) {
    Stream z(seed, Purpose::kAwgn, gains.round, 0);
    const double sd = std::sqrt(awgn_var);
    for (Eigen::Index j = 0; j < dim; ++j) y[j] += sd * z.normal();
  }
  out.noise_var = art + awgn_var;
  const double divisor_value =
      divisor == DivisorMode::kRealized
          ? static_cast<double>(out.participants.size())
          : expected_participants;
  if (divisor_value < 1.0) throw EmptyRoundError(gains.round);
  out.estimate = y / (sqrt_rho * divisor_value);
  return out;
}

namespace {

double max_sigma2(const ChannelParams& channel) {
  return *std::max_element(channel.sigma2.begin(), channel.sigma2.end());
}

}  // namespace

double round_eps(const TrainingSetup& s, double realized_noise) {
  PrivacyParams pp;
  pp.alpha = s.alpha;
  pp.grad_bound = s.grad_bound;
  if (s.strategy.baseline == Baseline::kHMinBased) {
    // Everybody transmits, so there is no amplification to claim.
    pp.participation = 1.0;
    pp.noise_var = realized_noise;
    return subsampled_round_eps_bound(pp);
  }
  pp.participation =
      participation_probability(s.rho, s.power, s.grad_bound, max_sigma2(s.channel));
  pp.noise_var = s.channel.awgn_var;
  if (s.strategy.artificial_noise()) {
    pp.noise_var += expected_noise_power(s.strategy.noisy_weight(), s.rho,
                                         s.channel, s.power, s.grad_bound);
  }
  if (s.strategy.baseline == Baseline::kIndependentSampling) {
    return is_baseline_round_eps(pp);
  }
  return subsampled_round_eps_bound(pp);
}

TrainingResult run_training(const TrainingSetup& s) {
  if (s.task == nullptr) throw ValidationError("task", "missing");
  if (s.tau < 0) throw ValidationError("tau", "must be >= 0");
  if (s.channel.num_clients() != s.task->num_clients()) {
    throw ValidationError("channel.num_clients", "must match the task");
  }
  const SyntheticTask& task = *s.task;
  const int k_total = task.num_clients();
  const int d = task.dim();
  const bool h_min = s.strategy.baseline == Baseline::kHMinBased;
  const double expected_k =
      h_min ? static_cast<double>(k_total)
            : expected_participants(s.rho, s.channel, s.power, s.grad_bound);

  const double fixed_eps = h_min || s.tau == 0 ? 0.0 : round_eps(s, 0.0);

  TrainingResult out;
  Eigen::VectorXd theta = s.theta0.size() == d ? s.theta0 : Eigen::VectorXd::Zero(d);
  Eigen::VectorXd weighted_sum = Eigen::VectorXd::Zero(d);
  double weight_total = 0.0;
  const double f_star = task.optimal_loss();
  std::vector<Eigen::VectorXd> updates(static_cast<std::size_t>(k_total));
  out.rounds.reserve(static_cast<std::size_t>(s.tau));

  for (std::int64_t t = 0; t < s.tau; ++t) {
    const auto round = static_cast<std::uint64_t>(t);
    const double beta = (s.learning.schedule_offset + static_cast<double>(t)) *
                        (s.learning.schedule_offset + static_cast<double>(t));
    weighted_sum += beta * theta;
    weight_total += beta;

    const GainDraw gains = sample_gains(s.channel, s.seed, round);
    const double eta = step_size<double>(t, s.learning);
    parallel_for(updates.size(), [&](std::size_t k) {
      Stream batch(s.seed, Purpose::kMinibatch, round, k);
      Eigen::VectorXd g =
          local_update(theta, task, static_cast<int>(k), s.learning.local_steps,
                       eta, s.batch_size, batch) -
          theta;
      if (s.update_form == UpdateForm::kRescaledGradient) g /= eta;
      if (s.normalize_to_bound && g.norm() > 0.0) {
        g *= s.grad_bound / g.norm();
      }
      updates[k] = clip_gradient(g, s.grad_bound);
    });

    const double rho =
        h_min ? s.power * gains.gains.minCoeff() / (s.grad_bound * s.grad_bound)
              : s.rho;
    TransmitOptions options{s.power, s.grad_bound, s.strategy.artificial_noise(),
                            s.seed};
    const TransmitPlan plan =
        build_transmit_plan(s.strategy, gains, updates, rho, options);

    RoundTrace trace;
    trace.t = t;
    try {
      AggregateResult agg = aggregate(plan, gains, updates, rho,
                                      s.channel.awgn_var, s.divisor, expected_k,
                                      s.seed);
      theta += s.update_form == UpdateForm::kRescaledGradient ? eta * agg.estimate
                                                              : agg.estimate;
      trace.participants = std::move(agg.participants);
      trace.sigma_q2_realized = agg.noise_var;
    } catch (const EmptyRoundError& e) {
      log_info(e.what());
      trace.empty = true;
      ++out.empty_rounds;
      double art = 0.0;
      for (std::size_t k = 0; k < plan.clients.size(); ++k) {
        if (plan.clients[k].role == ClientRole::kNoisy) {
          art += gains.gains[static_cast<Eigen::Index>(k)] * d *
                 plan.clients[k].noise_var;
        }
      }
      trace.sigma_q2_realized = art + s.channel.awgn_var;
    }
    // Empty rounds are charged too.
    out.ledger = out.ledger.compose(
        h_min ? round_eps(s, trace.sigma_q2_realized) : fixed_eps);
    trace.eps_cumulative = out.ledger.total_eps();
    trace.loss_current = task.loss(theta) - f_star;
    trace.loss_weighted = task.loss(weighted_sum / weight_total) - f_star;
    out.rounds.push_back(std::move(trace));
  }
  out.theta = theta;
  out.theta_weighted =
      weight_total > 0.0 ? Eigen::VectorXd(weighted_sum / weight_total) : theta;
  out.final_loss_current = task.loss(out.theta) - f_star;
  out.final_loss_weighted = task.loss(out.theta_weighted) - f_star;
  return out;
}

}  // namespace otafl
