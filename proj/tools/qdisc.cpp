// Copyright 2026 The qdisc Authors
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

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qdisc/app/commands.hpp"
#include "qdisc/version.hpp"

int main(int argc, char** argv) {
  namespace app = qdisc::app;
  CLI::App cli{"Discrimination of qubit states under decoherence: propagation, Krotov optimisation, "
               "parameter sweeps and effective-decay fits."};
  cli.set_version_flag("--version", qdisc::kVersion);
  cli.require_subcommand(1);

  std::string config;
  std::string out;
  std::size_t workers = 1;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  std::string table;
  std::vector<double> delta_b;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config, "experiment config (YAML)");
    if (needs_config) c->required();
    sub->add_option("--out", out, "output directory (overrides outputs.directory)");
    sub->add_option("--workers", workers,
                    "worker threads, 0 for all cores; capped by QDISC_MAX_WORKERS")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "seed for randomised guess perturbations");
    sub->add_flag("--verbose", verbose, "log every Krotov iteration");
  };
  common(cli.add_subcommand("propagate", "propagate both hypotheses and write the trajectory"), true);
  common(cli.add_subcommand("optimize", "run Krotov's method for a single (delta_B, T)"), true);
  common(cli.add_subcommand("sweep", "run all (delta_B, T, protocol) points on a worker pool"), true);
  auto* fit = cli.add_subcommand("fit", "fit the effective decay rate to a (delta_b, m) table");
  common(fit, true);
  fit->add_option("table", table, "CSV with delta_b and m columns (default: fit.table)");
  auto* qsl = cli.add_subcommand("qsl", "print the quantum speed limit pi/delta_B");
  common(qsl, false);
  qsl->add_option("--delta-b", delta_b, "field splitting(s)");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::kExitConfigError;
  }

  app::RunOptions opt;
  if (!out.empty()) opt.out = out;
  opt.workers = workers;
  opt.seed = seed;
  opt.verbose = verbose;
  opt.info = &std::cout;
  opt.log = &std::cerr;
  const std::string name = cli.get_subcommands().front()->get_name();
  std::optional<std::filesystem::path> cfg;
  if (!config.empty()) cfg = config;
  std::optional<std::filesystem::path> tbl;
  if (!table.empty()) tbl = table;
  return app::run_command(name, cfg, tbl, delta_b, opt);
}
