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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qdisc/app/config.hpp"
#include "qdisc/krotov.hpp"

namespace qdisc::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitOtherError = 1,
  kExitConfigError = 2,
  kExitNumericalFailure = 3,
  kExitPartialSweep = 4,
};

struct RunOptions {
  std::optional<std::filesystem::path> out;  // overrides outputs.directory
  std::size_t workers = 1;                   // 0 selects hardware concurrency
  std::optional<std::uint64_t> seed;         // overrides the config seed
  bool verbose = false;
  std::ostream* info = nullptr;  // stdout-like stream; nullptr silences it
  std::ostream* log = nullptr;   // diagnostics; nullptr silences them
};

/// One row of the tidy sweep table.
struct SweepRow {
  double delta_b = 0.0;
  double t_final = 0.0;
  Protocol protocol = Protocol::Ramsey;
  double d_hs = 0.0;
  double d_tr = 0.0;
  double purity1 = 0.0;
  double purity2 = 0.0;
  double qfi_over_t = 0.0;
  double m = 1.0;  // min over the trajectory of 1 − D_tr
  int iterations = 0;
  bool converged = true;
};

struct JobStatus {
  double delta_b = 0.0;
  double t_final = 0.0;
  Protocol protocol = Protocol::Ramsey;
  bool ok = false;
  std::string message;
};

struct SweepOutcome {
  std::vector<SweepRow> rows;      // successful jobs, sorted by (delta_b, T, protocol)
  std::vector<JobStatus> jobs;     // every job in the same order
  std::size_t workers_used = 1;
};

/// Problem for one (δB, T) point of a config.
DiscriminationProblem make_problem(const ExperimentConfig& cfg, double delta_b, double t_final);

/// Guess fields for an optimisation at one point. Unmasked controls receive
/// uniform noise of amplitude cfg.guess_noise drawn from a generator seeded
/// by (seed, δB, T), so results do not depend on scheduling.
ControlSet make_guess_fields(const ExperimentConfig& cfg, const DiscriminationProblem& problem,
                             std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

std::array<ShapeFunction, 3> make_shapes(const ExperimentConfig& cfg, const TimeGrid& grid);

/// Runs one sweep point. Throws on failure.
SweepRow run_point(const ExperimentConfig& cfg, double delta_b, double t_final, Protocol protocol,
                   std::uint64_t seed);

/// All (δB, T, protocol) points of a config on a worker pool.
SweepOutcome run_sweep(const ExperimentConfig& cfg, std::size_t workers, std::uint64_t seed);

/// Best M per (δB, protocol): the minimum of SweepRow::m over final times.
struct MPoint {
  double delta_b = 0.0;
  Protocol protocol = Protocol::Ramsey;
  double m = 1.0;
  double t_final = 0.0;
};
std::vector<MPoint> reduce_m_curve(const std::vector<SweepRow>& rows);

int cmd_propagate(const ExperimentConfig& cfg, const RunOptions& opt);
int cmd_optimize(const ExperimentConfig& cfg, const RunOptions& opt);
int cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opt);
/// Fits (delta_b, m) columns of `table` (per protocol when that column exists).
int cmd_fit(const ExperimentConfig& cfg, const std::filesystem::path& table, const RunOptions& opt);
int cmd_qsl(const std::vector<double>& delta_b, const RunOptions& opt);

/// Loads the config, runs the named subcommand and maps exceptions to exit
/// codes. Used by the command-line front end.
int run_command(const std::string& name, const std::optional<std::filesystem::path>& config,
                const std::optional<std::filesystem::path>& table,
                const std::vector<double>& qsl_delta_b, const RunOptions& opt);

}  // namespace qdisc::app
