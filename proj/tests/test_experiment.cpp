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

#include <charconv>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "otafl/csv.hpp"
#include "otafl/error.hpp"
#include "otafl/experiment.hpp"
#include "otafl/strategy.hpp"

using otafl::CsvTable;
using otafl::StrategySpec;

TEST_CASE("number formatting") {
  CHECK(otafl::format_number(0.1) == "0.1");
  CHECK(otafl::format_number(1.0) == "1");
  CHECK(otafl::format_number(-0.0) == "0");
  CHECK(otafl::format_number(1e-5) == "1e-05");
  CHECK(otafl::format_number(0.30000000000000004) == "0.30000000000000004");
  CHECK(otafl::format_number(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(otafl::format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(otafl::format_number(std::int64_t{-42}) == "-42");
  for (double v : {M_PI, 1.0 / 3, 6.02214076e23, 5e-324}) {
    const std::string s = otafl::format_number(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
}

TEST_CASE("csv dialect") {
  CsvTable t({"a", "b"});
  t.add_row({"x,y", "say \"hi\""});
  t.add_row({"plain", "line\nbreak"});
  CHECK(t.str() ==
        "a,b\r\n\"x,y\",\"say \"\"hi\"\"\"\r\nplain,\"line\nbreak\"\r\n");
  CHECK_THROWS(t.add_row({"one"}));
  CsvTable s({"k"});
  s.add_row({"b"});
  s.add_row({"a"});
  s.sort_rows();
  CHECK(s.str() == "k\r\na\r\nb\r\n");
}

TEST_CASE("csv write failure names the path") {
  CsvTable t({"a"});
  try {
    t.write("/nonexistent-dir/x.csv");
    FAIL("expected an io error");
  } catch (const otafl::IoError& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/x.csv") != std::string::npos);
    CHECK(e.code() == otafl::ExitCode::kIo);
  }
}

TEST_CASE("strategy parsing") {
  CHECK(StrategySpec::parse("noisy") == StrategySpec::noisy());
  CHECK(StrategySpec::parse("idle") == StrategySpec::idle());
  CHECK(StrategySpec::parse("mixed:0.5") == StrategySpec::mixed(0.5));
  CHECK(StrategySpec::parse("baseline:noise_free") ==
        StrategySpec::baseline_of(otafl::Baseline::kNoiseFree));
  CHECK(StrategySpec::parse("baseline:is_based").baseline ==
        otafl::Baseline::kIndependentSampling);
  CHECK_THROWS(StrategySpec::parse("mixed"));
  CHECK_THROWS(StrategySpec::parse("mixed:x"));
  CHECK_THROWS(StrategySpec::parse("baseline:nope"));
  CHECK(StrategySpec::parse("noise_free") == StrategySpec::parse("baseline:noise_free"));
  CHECK(otafl::strategy_slug(StrategySpec::mixed(0.5)) == "mixed-0.5");
  for (auto s : {StrategySpec::noisy(), StrategySpec::mixed(0.25),
                 StrategySpec::baseline_of(otafl::Baseline::kHMinBased)}) {
    CHECK(StrategySpec::parse(s.name()) == s);
  }
}

TEST_CASE("axis parsing") {
  const auto a = otafl::AxisSpec::parse("K=10,25,50");
  CHECK(a.name == "K");
  CHECK(a.values == std::vector<double>{10, 25, 50});
  CHECK_THROWS_AS(otafl::AxisSpec::parse("Q=1"), otafl::ValidationError);
  CHECK_THROWS_AS(otafl::AxisSpec::parse("K=1,x"), otafl::ValidationError);
  CHECK_THROWS_AS(otafl::AxisSpec::parse("K"), otafl::ValidationError);
}

TEST_CASE("rdp table columns") {
  otafl::RdpGrid grid;
  grid.alphas = {2, 3};
  grid.participations = {0.0, 0.4};
  grid.ratios = {0.1};
  const auto t = otafl::rdp_table(grid);
  REQUIRE(t.rows().size() == 4);
  for (const auto& row : t.rows()) {
    const double alpha = std::stod(row[0]);
    const double p = std::stod(row[1]);
    const double exact = std::stod(row[4]);
    const double bound = std::stod(row[5]);
    const double oracle = std::stod(row[6]);
    if (p == 0.0) {
      CHECK(exact == 0.0);
      CHECK(bound == doctest::Approx(std::log(2.0) / (alpha - 1)).epsilon(1e-15));
    }
    CHECK(oracle <= exact * (1 + 1e-6));
    CHECK(exact <= bound);
  }
}

TEST_CASE("optimize table at the defaults") {
  const auto sys = otafl::resolve(otafl::SystemConfig{});
  bool feasible = false;
  const auto t = otafl::optimize_table(sys, &feasible);
  CHECK(feasible);
  REQUIRE(t.rows().size() == 2);
  std::map<std::string, double> utility;
  for (const auto& row : t.rows()) {
    utility[row[0]] = std::stod(row[5]);
    CHECK(row[6] == "ok");
  }
  CHECK(utility.at("idle") <= utility.at("noisy"));
  CHECK(otafl::optimize_table(sys, &feasible).str() == t.str());
}

TEST_CASE("infeasible optimize reports a diagnostic row") {
  otafl::SystemConfig cfg;
  cfg.eps_bar = 1.0;
  const auto sys = otafl::resolve(cfg);
  bool feasible = true;
  const auto t = otafl::optimize_table(sys, &feasible);
  CHECK_FALSE(feasible);
  CHECK(t.rows().front()[6] != "ok");
}

TEST_CASE("train trace has one row per round") {
  const auto sys = otafl::resolve(otafl::SystemConfig{});
  const auto plan = otafl::plan_training(sys, StrategySpec::idle());
  const auto r = otafl::run_training(
      otafl::make_training_setup(sys, StrategySpec::idle(), plan.rho, plan.tau, 1));
  const auto t = otafl::trace_table(r);
  CHECK(t.header() == std::vector<std::string>{"t", "participants_count",
                                               "sigma_q2_realized", "loss_current",
                                               "loss_weighted", "eps_cumulative"});
  CHECK(t.rows().size() == std::size_t(plan.tau));
  double prev = 0.0;
  for (const auto& row : t.rows()) {
    const double e = std::stod(row[5]);
    CHECK(e >= prev);
    prev = e;
  }
  CHECK(prev <= sys.optimizer.eps_bar);
}

TEST_CASE("portion sweep endpoints match the pure strategies") {
  const auto sys = otafl::resolve(otafl::SystemConfig{});
  const auto t = otafl::sweep_table(sys, otafl::AxisSpec::parse("portion=0,1"));
  std::map<std::string, std::string> cell;
  for (const auto& row : t.rows()) cell[row[0] + "|" + row[1] + "|" + row[2]] = row[3];
  std::size_t matched = 0;
  for (const auto& [key, value] : cell) {
    if (key.rfind("0|mixed|", 0) == 0) {
      CHECK(cell.at("0|idle|" + key.substr(8)) == value);
      ++matched;
    }
    if (key.rfind("1|mixed|", 0) == 0) {
      CHECK(cell.at("1|noisy|" + key.substr(8)) == value);
      ++matched;
    }
  }
  CHECK(matched > 0);
}

TEST_CASE("commands write their csv files") {
  const auto dir = std::filesystem::temp_directory_path() / "otafl_unit_cmd";
  std::filesystem::remove_all(dir);
  otafl::RunOptions opts;
  opts.out_dir = dir;
  std::ostringstream log;
  otafl::SystemConfig cfg;
  cfg.rdp.alphas = {2};
  cfg.rdp.participations = {0.5};
  CHECK(otafl::cmd_optimize(cfg, opts, log) == 0);
  CHECK(otafl::cmd_rdp(cfg, opts, log) == 0);
  CHECK(std::filesystem::exists(dir / "optimize.csv"));
  CHECK(std::filesystem::exists(dir / "rdp.csv"));
  opts.axis = otafl::AxisSpec::parse("K=50,100");
  CHECK(otafl::cmd_sweep(cfg, opts, log) == 0);
  CHECK(std::filesystem::exists(dir / "sweep_K.csv"));
  std::filesystem::remove_all(dir);
}
