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
#include <vector>

#include "otafl/channel.hpp"
#include "otafl/convergence.hpp"
#include "otafl/error.hpp"
#include "otafl/random.hpp"

using otafl::ChannelContext;
using otafl::LearningParams;
using otafl::NoiseAccounting;

namespace {

LearningParams lp_with(double mu, double a) {
  LearningParams lp;
  lp.smoothness = 1.0;
  lp.strong_convexity = mu;
  lp.schedule_offset = a;
  return lp;
}

ChannelContext ctx_at(double w, double rho) {
  return otafl::make_channel_context(
      w, rho, otafl::ChannelParams::homogeneous(100, 0.5, 1e-2), 1.0, 1.0,
      NoiseAccounting::kArtificialOnly);
}

}  // namespace

TEST_CASE("step size") {
  CHECK(otafl::step_size<double>(0, lp_with(1, 4)) == 1.0);
  CHECK(otafl::step_size<double>(4, lp_with(2, 4)) == 0.25);
  const auto lp = lp_with(1, 4);
  for (int t = 0; t < 100; ++t) {
    CHECK(otafl::step_size<double>(t + 1, lp) < otafl::step_size<double>(t, lp));
  }
}

TEST_CASE("weight sum") {
  CHECK(otafl::weight_sum<double>(2, lp_with(1, 1)) == 5.0);
  CHECK(otafl::weight_sum<double>(1, lp_with(1, 1)) == 1.0);
  CHECK(otafl::weight_sum<double>(1000, lp_with(1, 10)) ==
        doctest::Approx(342923500.0).epsilon(1e-10));
  for (int tau : {1, 2, 10, 100}) {
    CHECK(otafl::weight_sum<double>(tau, lp_with(1, 4.5)) >=
          tau * tau * tau / 3.0);
  }
  CHECK_THROWS_AS(otafl::weight_sum<double>(0, lp_with(1, 4)),
                  otafl::ValidationError);
}

TEST_CASE("learning params validation") {
  auto lp = lp_with(1, 4);
  CHECK_NOTHROW(lp.validate());
  lp.strong_convexity = 1.5;
  CHECK_THROWS_AS(lp.validate(), otafl::ValidationError);
  lp = lp_with(1, 2.4);
  CHECK_THROWS_AS(lp.validate(), otafl::ValidationError);
}

TEST_CASE("bound vanishes as participants grow") {
  const auto lp = lp_with(1, 4);
  const ChannelContext small{10.0, 0.0};
  const ChannelContext large{1e6, 0.0};
  CHECK(otafl::theorem2_bound(50, 0.5, lp, large) <
        1e-3 * otafl::theorem2_bound(50, 0.5, lp, small));
}

TEST_CASE("doubling tau reduces the bound") {
  auto lp = lp_with(1, 4);
  lp.init_gap = 0.5;
  const auto ctx = ctx_at(0.0, 0.5);
  double prev = otafl::theorem2_bound(10, 0.5, lp, ctx);
  for (int tau = 20; tau <= 1280; tau *= 2) {
    const double g = otafl::theorem2_bound(tau, 0.5, lp, ctx);
    CHECK(g < prev);
    prev = g;
  }
}

TEST_CASE("bound rejects degenerate inputs") {
  const auto lp = lp_with(1, 4);
  CHECK_THROWS_AS(otafl::theorem2_bound(10, 0.0, lp, ChannelContext{10, 1}),
                  otafl::ValidationError);
  CHECK_THROWS_AS(otafl::theorem2_bound(10, 0.5, lp, ChannelContext{0.5, 1}),
                  otafl::ValidationError);
  CHECK_THROWS_AS(otafl::gamma_approx(10, 0.5, lp, ChannelContext{0.5, 1}),
                  otafl::ValidationError);
}

TEST_CASE("approximation scales as 1/tau") {
  const auto lp = lp_with(1, 4);
  const auto ctx = ctx_at(1.0, 0.4);
  for (int tau : {1, 3, 50}) {
    CHECK(otafl::gamma_approx(2 * tau, 0.4, lp, ctx) ==
          doctest::Approx(otafl::gamma_approx(tau, 0.4, lp, ctx) / 2)
              .epsilon(1e-15));
  }
}

TEST_CASE("approximation monotone in participants and noise") {
  const auto lp = lp_with(1, 4);
  const double base = otafl::gamma_approx(10, 0.5, lp, ChannelContext{20, 5});
  CHECK(otafl::gamma_approx(10, 0.5, lp, ChannelContext{30, 5}) < base);
  CHECK(otafl::gamma_approx(10, 0.5, lp, ChannelContext{20, 6}) > base);
  CHECK(otafl::theorem2_bound(10, 0.5, lp, ChannelContext{30, 5}) <
        otafl::theorem2_bound(10, 0.5, lp, ChannelContext{20, 5}));
  CHECK(otafl::theorem2_bound(10, 0.5, lp, ChannelContext{20, 6}) >
        otafl::theorem2_bound(10, 0.5, lp, ChannelContext{20, 5}));
}

TEST_CASE("idle approximation against Monte-Carlo channel statistics") {
  const auto ch = otafl::ChannelParams::homogeneous(100, 0.5, 0.0);
  const auto lp = lp_with(1, 4);
  const double rho = 0.5;
  otafl::Stream s(31);
  const int rounds = 20000;
  double kt = 0.0, noise = 0.0;
  for (int r = 0; r < rounds; ++r) {
    const auto d = otafl::sample_gains(ch, s);
    for (int k = 0; k < 100; ++k) {
      if (d.gains[k] >= rho) {
        kt += 1;
        noise += d.gains[k] - rho;
      }
    }
  }
  const ChannelContext mc{kt / rounds, noise / rounds};
  const auto closed = otafl::make_channel_context(
      0.0, rho, ch, 1.0, 1.0, NoiseAccounting::kArtificialOnly);
  CHECK(otafl::gamma_approx(1, rho, lp, mc) ==
        doctest::Approx(otafl::gamma_approx(1, rho, lp, closed)).epsilon(0.02));
}

TEST_CASE("noisy approximation dominates idle") {
  const auto lp = lp_with(1, 4);
  for (int i = 1; i <= 100; ++i) {
    const double rho = i / 100.0;
    CHECK(otafl::gamma_approx(10, rho, lp, ctx_at(1.0, rho)) >=
          otafl::gamma_approx(10, rho, lp, ctx_at(0.0, rho)));
  }
}

TEST_CASE("approximation is convex in rho") {
  const auto lp = lp_with(1, 4);
  for (double w : {0.0, 1.0}) {
    std::vector<double> g;
    for (int i = 1; i <= 200; ++i) {
      const double rho = i / 200.0;
      g.push_back(otafl::gamma_approx(1, rho, lp, ctx_at(w, rho)));
    }
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
      CHECK(g[i - 1] - 2 * g[i] + g[i + 1] > 0.0);
    }
  }
}

TEST_CASE("initial-gap term fades") {
  for (double a : {4.0, 7.0, 10.0}) {
    auto lp = lp_with(1, a);
    lp.init_gap = 1.0;
    auto no_gap = lp;
    no_gap.init_gap = 0.0;
    const auto ctx = ctx_at(0.0, 0.5);
    double prev = 1.0;
    for (int tau : {50, 100, 200, 400, 800}) {
      const double total = otafl::theorem2_bound(tau, 0.5, lp, ctx);
      const double share =
          (total - otafl::theorem2_bound(tau, 0.5, no_gap, ctx)) / total;
      CHECK(share < prev);
      if (a == 4.0) CHECK(share < 0.05);
      prev = share;
    }
  }
}

TEST_CASE("channel context accounting modes") {
  const auto ch = otafl::ChannelParams::homogeneous(100, 0.5, 0.25);
  const auto art = otafl::make_channel_context(
      0.0, 0.5, ch, 1.0, 1.0, NoiseAccounting::kArtificialOnly);
  const auto all = otafl::make_channel_context(0.0, 0.5, ch, 1.0, 1.0,
                                               NoiseAccounting::kWithAwgn);
  CHECK(all.noise_var == doctest::Approx(art.noise_var + 0.25));
  CHECK(all.expected_participants == art.expected_participants);
  const auto none = otafl::make_channel_context(
      0.0, 0.5, ch, 1.0, 1.0, NoiseAccounting::kWithAwgn, false);
  CHECK(none.noise_var == 0.25);
}
