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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdisc/controls.hpp"
#include "qdisc/dynamics.hpp"
#include "qdisc/krotov.hpp"

namespace qdisc::app {

/// Raised for unreadable, malformed or out-of-range configuration. The
/// message carries the source name and, where known, the 1-based line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Protocol { Ramsey, Optimize };
const char* protocol_name(Protocol p);

/// Guess description as written in the config. Unset geometry is filled in
/// per final time from the kick defaults.
struct GuessConfig {
  enum class Kind { Zero, Constant, CancelDrift, KickPair, SplitPeak } kind = Kind::Zero;
  double value = 0.0;
  std::optional<double> amplitude;
  std::optional<double> width;
  std::optional<double> center1;
  std::optional<double> center2;

  GuessSpec resolve(double t_final) const;
};

struct TimeFamily {
  std::size_t count = 6;
  double lo = 0.5;
  double hi = 16.0;
  double cap = 10.0;
};

struct ExperimentConfig {
  std::filesystem::path source;  // config file, used to resolve relative paths
  std::string text;              // raw bytes, hashed into the manifest

  // problem
  double field = 1.0;
  std::vector<double> delta_b;
  LindbladSpec noise = LindbladSpec::none();
  double decay_time = 0.0;
  DensityMatrix initial = DensityMatrix::plus();

  // grid
  std::vector<double> t_final;
  std::optional<TimeFamily> t_family;
  std::optional<std::size_t> n_steps;
  GridPolicy policy;

  std::vector<Protocol> protocols{Protocol::Ramsey};

  // krotov
  bool has_krotov = false;
  KrotovConfig krotov;
  std::array<GuessConfig, 3> guesses{};
  double shape_ramp = kDefaultRampFraction;
  double guess_noise = 0.0;

  // fixed fields for propagate
  std::array<std::optional<std::filesystem::path>, 3> field_files{};

  std::optional<double> qfi_splitting;

  // fit
  std::optional<std::filesystem::path> fit_table;
  bool fit_after_sweep = false;

  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;

  /// Final times for one δB: the explicit list, or the family around T_QSL.
  std::vector<double> final_times(double delta_b) const;
  TimeGrid grid_for(double t_final, double delta_b) const;
};

ExperimentConfig parse_config(const std::string& text, const std::string& source_name);
ExperimentConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a of the raw config bytes, as 16 hex digits.
std::string config_hash(const std::string& text);

}  // namespace qdisc::app
