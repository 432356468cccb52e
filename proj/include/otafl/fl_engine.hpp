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

#ifndef OTAFL_FL_ENGINE_HPP_
#define OTAFL_FL_ENGINE_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "otafl/channel.hpp"
#include "otafl/convergence.hpp"
#include "otafl/rdp.hpp"
#include "otafl/strategy.hpp"
#include "otafl/task.hpp"

namespace otafl {

enum class ClientRole { kReliable, kNoisy, kIdle };

struct TransmitEntry {
  ClientRole role = ClientRole::kIdle;
  double scale = 0.0;      // a_{k,t}
  double noise_var = 0.0;  // sigma_r^2 per coordinate
};

struct TransmitPlan {
  std::vector<TransmitEntry> clients;
};

// Server divisor: realized |K_t| or its expectation K_t(rho).
enum class DivisorMode { kRealized, kExpected };

// kDisplacement sends theta_L - theta_0 and applies theta += g_hat.
// kRescaledGradient sends (theta_L - theta_0) / eta and applies
// theta += eta * g_hat.
enum class UpdateForm { kDisplacement, kRescaledGradient };

Eigen::VectorXd clip_gradient(const Eigen::VectorXd& g, double bound);

// L SGD steps at rate eta on the client's loss. batch_size 0 means full
// batch; otherwise rows are drawn without replacement from `rng`.
Eigen::VectorXd local_update(const Eigen::VectorXd& theta,
                             const SyntheticTask& task, int client,
                             int local_steps, double eta, int batch_size,
                             Stream& rng);

struct TransmitOptions {
  double power = 1.0;
  double grad_bound = 1.0;
  // False forces sigma_r^2 = 0 for everybody (noise-free baseline).
  bool artificial_noise = true;
  std::uint64_t seed = 0;  // coin flips come from (seed, kCoin, round, k)
};

// Reliable clients (h_k >= h_th) invert the channel to land at sqrt(rho)
// and spend the rest of P on noise. Unreliable clients follow `strategy`.
TransmitPlan build_transmit_plan(const StrategySpec& strategy,
                                 const GainDraw& gains,
                                 std::span<const Eigen::VectorXd> updates,
                                 double rho, const TransmitOptions& options);

struct AggregateResult {
  Eigen::VectorXd estimate;
  std::vector<int> participants;
  // d * (sum_rel rho sigma_r^2 + sum_noisy h sigma_r^2) + sigma_z^2.
  double noise_var = 0.0;
};

// y = sum_rel sqrt(rho)(g_k + r_k) + sum_noisy sqrt(h_k) r_k + z and
// g_hat = y / (sqrt(rho) D). Throws EmptyRoundError when D < 1.
AggregateResult aggregate(const TransmitPlan& plan, const GainDraw& gains,
                          std::span<const Eigen::VectorXd> updates, double rho,
                          double awgn_var, DivisorMode divisor,
                          double expected_participants, std::uint64_t seed);

// Per-round eps for the independent-sampling baseline: no amplification.
inline double is_baseline_round_eps(const PrivacyParams& pp) {
  return gaussian_round_eps(pp);
}

struct TrainingSetup {
  const SyntheticTask* task = nullptr;
  ChannelParams channel;
  double power = 1.0;
  double grad_bound = 1.0;
  int alpha = 2;
  StrategySpec strategy;
  double rho = 0.5;
  std::int64_t tau = 0;
  std::uint64_t seed = 1;
  LearningParams learning;
  int batch_size = 0;
  DivisorMode divisor = DivisorMode::kRealized;
  UpdateForm update_form = UpdateForm::kRescaledGradient;
  // Scale every nonzero update to norm exactly W before transmission.
  bool normalize_to_bound = false;
  Eigen::VectorXd theta0;  // empty means zero
};

struct RoundTrace {
  std::int64_t t = 0;
  std::vector<int> participants;
  double sigma_q2_realized = 0.0;
  double loss_current = 0.0;   // f(theta_{t+1}) - f*
  double loss_weighted = 0.0;  // f(Theta_{t+1}) - f*
  double eps_cumulative = 0.0;
  bool empty = false;
};

struct TrainingResult {
  std::vector<RoundTrace> rounds;
  RdpLedger ledger;
  Eigen::VectorXd theta;
  Eigen::VectorXd theta_weighted;
  double final_loss_current = 0.0;
  double final_loss_weighted = 0.0;
  int empty_rounds = 0;
};

// Privacy charged per round by `strategy` at rho. `realized_noise` is only
// read by the h_min baseline, whose rho is not tied to channel statistics.
double round_eps(const TrainingSetup& setup, double realized_noise);

TrainingResult run_training(const TrainingSetup& setup);

}  // namespace otafl

#endif  // OTAFL_FL_ENGINE_HPP_
