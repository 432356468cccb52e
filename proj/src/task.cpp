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

#include "otafl/task.hpp"

#include <cmath>

#include "otafl/error.hpp"
#include "otafl/random.hpp"

namespace otafl {

namespace {

double log1pexp(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

void TaskSpec::validate() const {
  if (num_clients < 1) throw ValidationError("channel.num_clients", "must be >= 1");
  if (dim < 1) throw ValidationError("task.dim", "must be >= 1");
  if (samples_per_client < 1) {
    throw ValidationError("task.samples_per_client", "must be >= 1");
  }
  if (!(regularizer >= 0.0)) throw ValidationError("task.regularizer", "must be >= 0");
  if (kind == TaskKind::kLogisticL2 && !(regularizer > 0.0)) {
    throw ValidationError("task.regularizer",
                          "logistic_l2 needs a positive regularizer");
  }
  if (!(target_norm >= 0.0)) throw ValidationError("task.target_norm", "must be >= 0");
  if (!(client_shift >= 0.0)) throw ValidationError("task.client_shift", "must be >= 0");
  if (!(label_noise >= 0.0)) throw ValidationError("task.label_noise", "must be >= 0");
}

SyntheticTask SyntheticTask::generate(const TaskSpec& spec) {
  spec.validate();
  const int d = spec.dim;
  const int n = spec.samples_per_client;
  Stream root(spec.seed, Purpose::kTask, 0, 0);
  Eigen::VectorXd truth(d);
  for (int j = 0; j < d; ++j) truth[j] = root.normal();
  if (truth.norm() > 0.0) truth *= spec.target_norm / truth.norm();

  std::vector<Eigen::MatrixXd> features;
  std::vector<Eigen::VectorXd> labels;
  features.reserve(static_cast<std::size_t>(spec.num_clients));
  labels.reserve(static_cast<std::size_t>(spec.num_clients));
  for (int k = 0; k < spec.num_clients; ++k) {
    // Each client has its own stream so K does not perturb earlier clients.
    Stream s(spec.seed, Purpose::kTask, 1, static_cast<std::uint64_t>(k));
    Eigen::VectorXd local = truth;
    for (int j = 0; j < d; ++j) local[j] += spec.client_shift * s.normal();
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) x(i, j) = s.normal();
    }
    Eigen::VectorXd y = x * local;
    for (int i = 0; i < n; ++i) {
      const double noisy = y[i] + spec.label_noise * s.normal();
      y[i] = spec.kind == TaskKind::kQuadratic ? noisy
                                               : (noisy >= 0.0 ? 1.0 : -1.0);
    }
    features.push_back(std::move(x));
    labels.push_back(std::move(y));
  }
  return from_data(spec.kind, std::move(features), std::move(labels),
                   spec.regularizer);
}

SyntheticTask SyntheticTask::from_data(TaskKind kind,
                                       std::vector<Eigen::MatrixXd> features,
                                       std::vector<Eigen::VectorXd> labels,
                                       double regularizer) {
  if (features.empty() || features.size() != labels.size()) {
    throw ValidationError("task", "features and labels must be non-empty and "
                                  "of equal length");
  }
  for (std::size_t k = 0; k < features.size(); ++k) {
    if (features[k].rows() != labels[k].size() || features[k].rows() < 1 ||
        features[k].cols() != features.front().cols()) {
      throw ValidationError("task", "inconsistent client data shapes");
    }
  }
  SyntheticTask task;
  task.kind_ = kind;
  task.x_ = std::move(features);
  task.y_ = std::move(labels);
  task.reg_ = regularizer;
  task.solve();
  return task;
}

void SyntheticTask::solve() {
  const int d = dim();
  const double k = num_clients();
  // Data part of the global Hessian, exact for the quadratic task and the
  // 1/4 curvature envelope for logistic.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
  for (const auto& x : x_) {
    gram += x.transpose() * x / (static_cast<double>(x.rows()) * k);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd ev = eig.eigenvalues();

  if (kind_ == TaskKind::kQuadratic) {
    smoothness_ = ev.maxCoeff() + reg_;
    strong_convexity_ = ev.minCoeff() + reg_;
    if (!(strong_convexity_ > 0.0)) {
      throw ValidationError("task", "quadratic Hessian is singular");
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (std::size_t c = 0; c < x_.size(); ++c) {
      rhs += x_[c].transpose() * y_[c] / (static_cast<double>(x_[c].rows()) * k);
    }
    const Eigen::MatrixXd h = gram + reg_ * Eigen::MatrixXd::Identity(d, d);
    optimum_ = h.ldlt().solve(rhs);
  } else {
    smoothness_ = reg_ + 0.25 * ev.maxCoeff();
    strong_convexity_ = reg_;
    // Damped Newton to a gradient norm below 1e-10.
    optimum_ = Eigen::VectorXd::Zero(d);
    for (int it = 0; it < 200; ++it) {
      const Eigen::VectorXd g = gradient(optimum_);
      if (g.norm() < 1e-10) break;
      Eigen::MatrixXd h = reg_ * Eigen::MatrixXd::Identity(d, d);
      for (std::size_t c = 0; c < x_.size(); ++c) {
        const Eigen::VectorXd z = x_[c] * optimum_;
        Eigen::VectorXd w(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) {
          const double s = sigmoid(y_[c][i] * z[i]);
          w[i] = s * (1.0 - s);
        }
        h += x_[c].transpose() * w.asDiagonal() * x_[c] /
             (static_cast<double>(x_[c].rows()) * k);
      }
      const Eigen::VectorXd step = h.ldlt().solve(g);
      double t = 1.0;
      const double f0 = loss(optimum_);
      while (t > 1e-8 && loss(optimum_ - t * step) > f0 - 0.25 * t * g.dot(step)) {
        t *= 0.5;
      }
      optimum_ -= t * step;
    }
    if (gradient(optimum_).norm() >= 1e-10) {
      throw NumericalError("logistic reference solver did not converge");
    }
  }
  optimal_loss_ = loss(optimum_);
}

double SyntheticTask::client_loss(int c, const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd z = x_[c] * theta;
  const double n = static_cast<double>(x_[c].rows());
  double data = 0.0;
  if (kind_ == TaskKind::kQuadratic) {
    data = (z - y_[c]).squaredNorm() / (2.0 * n);
  } else {
    for (Eigen::Index i = 0; i < z.size(); ++i) data += log1pexp(-y_[c][i] * z[i]);
    data /= n;
  }
  return data + 0.5 * reg_ * theta.squaredNorm();
}

double SyntheticTask::loss(const Eigen::VectorXd& theta) const {
  double sum = 0.0;
  for (int c = 0; c < num_clients(); ++c) sum += client_loss(c, theta);
  return sum / num_clients();
}

Eigen::VectorXd SyntheticTask::client_gradient(
    int c, const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd z = x_[c] * theta;
  const double n = static_cast<double>(x_[c].rows());
  Eigen::VectorXd r(z.size());
  if (kind_ == TaskKind::kQuadratic) {
    r = z - y_[c];
  } else {
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      r[i] = -y_[c][i] * sigmoid(-y_[c][i] * z[i]);
    }
  }
  return x_[c].transpose() * r / n + reg_ * theta;
}

Eigen::VectorXd SyntheticTask::client_gradient(
    int c, const Eigen::VectorXd& theta, std::span<const int> rows) const {
  Eigen::VectorXd g = reg_ * theta;
  const double n = static_cast<double>(rows.size());
  for (int i : rows) {
    const auto xi = x_[c].row(i);
    const double z = xi.dot(theta);
    const double r = kind_ == TaskKind::kQuadratic
                         ? z - y_[c][i]
                         : -y_[c][i] * sigmoid(-y_[c][i] * z);
    g += xi.transpose() * (r / n);
  }
  return g;
}

Eigen::VectorXd SyntheticTask::gradient(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim());
  for (int c = 0; c < num_clients(); ++c) g += client_gradient(c, theta);
  return g / num_clients();
}

}  // namespace otafl
