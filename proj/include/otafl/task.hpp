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

#ifndef OTAFL_TASK_HPP_
#define OTAFL_TASK_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace otafl {

enum class TaskKind { kQuadratic, kLogisticL2 };

struct TaskSpec {
  TaskKind kind = TaskKind::kQuadratic;
  int num_clients = 100;
  int dim = 10;
  int samples_per_client = 50;
  double regularizer = 0.0;
  double target_norm = 0.35;   // ||theta_true||
  double client_shift = 0.03;  // per-client drift of the local optimum
  double label_noise = 0.1;
  std::uint64_t seed = 7;

  void validate() const;
};

// Federated synthetic objective f = (1/K) sum_k f_k with
//   quadratic:   f_k = ||X_k theta - y_k||^2 / (2 n_k) + reg ||theta||^2 / 2
//   logistic_l2: f_k = mean log(1 + exp(-y x^T theta)) + reg ||theta||^2 / 2
class SyntheticTask {
 public:
  static SyntheticTask generate(const TaskSpec& spec);
  static SyntheticTask from_data(TaskKind kind,
                                 std::vector<Eigen::MatrixXd> features,
                                 std::vector<Eigen::VectorXd> labels,
                                 double regularizer);

  TaskKind kind() const { return kind_; }
  int num_clients() const { return static_cast<int>(x_.size()); }
  int dim() const { return static_cast<int>(x_.front().cols()); }
  int samples(int client) const { return static_cast<int>(x_[client].rows()); }
  double regularizer() const { return reg_; }

  double loss(const Eigen::VectorXd& theta) const;
  double client_loss(int client, const Eigen::VectorXd& theta) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd client_gradient(int client,
                                  const Eigen::VectorXd& theta) const;
  // Minibatch gradient over the given rows of the client's data.
  Eigen::VectorXd client_gradient(int client, const Eigen::VectorXd& theta,
                                  std::span<const int> rows) const;

  const Eigen::VectorXd& optimum() const { return optimum_; }
  double optimal_loss() const { return optimal_loss_; }
  // Curvature extremes of the global objective.
  double smoothness() const { return smoothness_; }
  double strong_convexity() const { return strong_convexity_; }

 private:
  SyntheticTask() = default;
  void solve();

  TaskKind kind_ = TaskKind::kQuadratic;
  std::vector<Eigen::MatrixXd> x_;
  std::vector<Eigen::VectorXd> y_;
  double reg_ = 0.0;
  Eigen::VectorXd optimum_;
  double optimal_loss_ = 0.0;
  double smoothness_ = 0.0;
  double strong_convexity_ = 0.0;
};

}  // namespace otafl

#endif  // OTAFL_TASK_HPP_
