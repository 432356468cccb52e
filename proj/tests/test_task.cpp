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

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "otafl/error.hpp"
#include "otafl/task.hpp"

using otafl::SyntheticTask;
using otafl::TaskKind;
using otafl::TaskSpec;

namespace {

TaskSpec small_spec(TaskKind kind) {
  TaskSpec s;
  s.kind = kind;
  s.num_clients = 8;
  s.dim = 4;
  s.samples_per_client = 20;
  s.regularizer = kind == TaskKind::kLogisticL2 ? 0.05 : 0.0;
  return s;
}

Eigen::VectorXd numeric_gradient(const SyntheticTask& t, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (t.loss(a) - t.loss(b)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("task generation is deterministic") {
  for (auto kind : {TaskKind::kQuadratic, TaskKind::kLogisticL2}) {
    const auto a = SyntheticTask::generate(small_spec(kind));
    const auto b = SyntheticTask::generate(small_spec(kind));
    CHECK(a.optimum() == b.optimum());
    CHECK(a.smoothness() == b.smoothness());
  }
}

TEST_CASE("optimum and curvature") {
  for (auto kind : {TaskKind::kQuadratic, TaskKind::kLogisticL2}) {
    const auto t = SyntheticTask::generate(small_spec(kind));
    CHECK(t.gradient(t.optimum()).norm() < 1e-10);
    CHECK(t.optimal_loss() == t.loss(t.optimum()));
    CHECK(t.strong_convexity() > 0);
    CHECK(t.strong_convexity() <= t.smoothness());
    Eigen::VectorXd off = t.optimum();
    off[0] += 0.1;
    CHECK(t.loss(off) > t.optimal_loss());
  }
}

TEST_CASE("logistic curvature uses the regularizer") {
  const auto t = SyntheticTask::generate(small_spec(TaskKind::kLogisticL2));
  CHECK(t.strong_convexity() == 0.05);
}

TEST_CASE("quadratic curvature brackets every direction") {
  const auto t = SyntheticTask::generate(small_spec(TaskKind::kQuadratic));
  for (int i = 0; i < 4; ++i) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(4);
    u[i] = 1.0;
    // f(x* + u) - f* = u^T H u / 2 for a quadratic.
    const double q = 2 * (t.loss(t.optimum() + u) - t.optimal_loss());
    CHECK(q >= t.strong_convexity() * (1 - 1e-12));
    CHECK(q <= t.smoothness() * (1 + 1e-12));
  }
}

TEST_CASE("gradients agree with finite differences and client means") {
  for (auto kind : {TaskKind::kQuadratic, TaskKind::kLogisticL2}) {
    const auto t = SyntheticTask::generate(small_spec(kind));
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(4, -0.3, 0.4);
    CHECK((t.gradient(x) - numeric_gradient(t, x)).norm() < 1e-7);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(4);
    double loss = 0.0;
    for (int k = 0; k < t.num_clients(); ++k) {
      mean += t.client_gradient(k, x);
      loss += t.client_loss(k, x);
    }
    CHECK((mean / t.num_clients() - t.gradient(x)).norm() < 1e-14);
    CHECK(loss / t.num_clients() == doctest::Approx(t.loss(x)).epsilon(1e-14));
    std::vector<int> rows(static_cast<std::size_t>(t.samples(2)));
    std::iota(rows.begin(), rows.end(), 0);
    CHECK((t.client_gradient(2, x, rows) - t.client_gradient(2, x)).norm() < 1e-14);
  }
}

TEST_CASE("from_data builds a centred quadratic") {
  // X = sqrt(n) I and y = sqrt(n) c give f = ||theta - c||^2 / 2.
  const int n = 3;
  Eigen::VectorXd c(3);
  c << 1.0, -2.0, 0.5;
  std::vector<Eigen::MatrixXd> xs{std::sqrt(double(n)) * Eigen::MatrixXd::Identity(n, n)};
  std::vector<Eigen::VectorXd> ys{std::sqrt(double(n)) * c};
  const auto t = SyntheticTask::from_data(TaskKind::kQuadratic, xs, ys, 0.0);
  CHECK((t.optimum() - c).norm() < 1e-12);
  CHECK(t.smoothness() == doctest::Approx(1.0));
  CHECK(t.strong_convexity() == doctest::Approx(1.0));
  CHECK(t.loss(Eigen::VectorXd::Zero(3)) == doctest::Approx(0.5 * c.squaredNorm()));
}

TEST_CASE("task spec validation") {
  auto s = small_spec(TaskKind::kQuadratic);
  s.dim = 0;
  CHECK_THROWS_AS(s.validate(), otafl::ValidationError);
  s = small_spec(TaskKind::kLogisticL2);
  s.regularizer = 0.0;
  CHECK_THROWS_AS(s.validate(), otafl::ValidationError);
}
