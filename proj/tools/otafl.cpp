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

// Command-line front end: optimize | train | sweep | rdp | validate.

#include <CLI11.hpp>
#include <iostream>

#include "otafl/experiment.hpp"
#include "otafl/log.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Over-the-air federated learning simulator with client-driven power balancing"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string strategy;
  std::string axis;
  bool verbose = false;
  bool quiet = false;
  bool print_defaults = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config; empty file gives every default");
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "master seed (overrides training.seed, single seed)");
    sub->add_option("--strategy", strategy,
                    "noisy | idle | mixed:<portion> | baseline:<gamma_based|h_min_based|"
                    "noise_free|is_based>");
    sub->add_option("--axis", axis, "sweep axis: tau|K|P|gamma_bar|portion=<v1,v2,...>");
    sub->add_flag("-v,--verbose", verbose, "info-level diagnostics on stderr");
    sub->add_flag("-q,--quiet", quiet, "suppress warnings");
  };
  for (const char* name : {"optimize", "train", "sweep", "rdp", "validate"}) {
    add_common(app.add_subcommand(name));
  }
  app.add_flag("--print-default-config", print_defaults, "print the default config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Argument problems share the validation exit code.
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(otafl::ExitCode::kValidation);
  }
  if (print_defaults) {
    std::cout << otafl::default_config_json();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return static_cast<int>(otafl::ExitCode::kValidation);
  }
  if (verbose) otafl::set_log_level(otafl::LogLevel::kInfo);
  if (quiet) otafl::set_log_level(otafl::LogLevel::kQuiet);

  try {
    const otafl::SystemConfig cfg = config_path.empty()
                                        ? otafl::parse_config("", "<defaults>")
                                        : otafl::load_config(config_path);
    otafl::RunOptions opts;
    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--out") > 0) opts.out_dir = out_dir;
    if (sub->count("--seed") > 0) opts.seed = seed;
    if (!strategy.empty()) opts.strategy = otafl::StrategySpec::parse(strategy);
    if (!axis.empty()) opts.axis = otafl::AxisSpec::parse(axis);

    const std::string& name = sub->get_name();
    if (name == "optimize") return otafl::cmd_optimize(cfg, opts, std::cout);
    if (name == "train") return otafl::cmd_train(cfg, opts, std::cout);
    if (name == "sweep") return otafl::cmd_sweep(cfg, opts, std::cout);
    if (name == "rdp") return otafl::cmd_rdp(cfg, opts, std::cout);
    return otafl::cmd_validate(cfg, opts, std::cout);
  } catch (const otafl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(otafl::ExitCode::kNumerical);
  }
}
