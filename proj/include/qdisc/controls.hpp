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
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qdisc {

/// Uniform grid t_j = j·dt, j = 0..n_steps, on [0, t_final].
class TimeGrid {
 public:
  TimeGrid(double t_final, std::size_t n_steps);

  double t_final() const { return t_final_; }
  std::size_t n_steps() const { return n_steps_; }
  double dt() const { return t_final_ / static_cast<double>(n_steps_); }
  double time(std::size_t j) const { return dt() * static_cast<double>(j); }
  /// Centre of interval j, where the piecewise-constant fields are sampled.
  double midpoint(std::size_t j) const { return dt() * (static_cast<double>(j) + 0.5); }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double t_final_;
  std::size_t n_steps_;
};

/// Resolution rules for grids built without an explicit step count.
struct GridPolicy {
  double points_per_unit_time = 10.0;
  double points_per_period = 50.0;  // per 2π/δB
  double points_per_decay = 100.0;  // per decay time
};

/// Smallest grid on [0, t_final] satisfying every rule of `policy`.
/// A non-positive decay_time means no dissipation.
TimeGrid default_grid(double t_final, double delta_b, double decay_time,
                      const GridPolicy& policy = {});

enum class Control { X = 0, Y = 1, Z = 2 };
inline constexpr std::array<Control, 3> kAllControls{Control::X, Control::Y, Control::Z};
const char* control_name(Control k);

/// Piecewise-constant field: samples[j] is the value on [t_j, t_{j+1}).
class ControlField {
 public:
  ControlField() = default;
  explicit ControlField(std::vector<double> samples);
  static ControlField zeros(std::size_t n) { return ControlField(std::vector<double>(n, 0.0)); }
  static ControlField constant(std::size_t n, double value) {
    return ControlField(std::vector<double>(n, value));
  }

  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t j) const { return samples_[j]; }
  double& operator[](std::size_t j) { return samples_[j]; }
  std::span<const double> samples() const { return samples_; }

  friend bool operator==(const ControlField&, const ControlField&) = default;

 private:
  std::vector<double> samples_;
};

/// E_x, E_y, E_z indexed by Control.
struct ControlSet {
  std::array<ControlField, 3> fields;

  static ControlSet zeros(std::size_t n) {
    return {{ControlField::zeros(n), ControlField::zeros(n), ControlField::zeros(n)}};
  }
  ControlField& operator[](Control k) { return fields[static_cast<int>(k)]; }
  const ControlField& operator[](Control k) const { return fields[static_cast<int>(k)]; }
  /// (E_x, E_y, E_z) on interval j.
  std::array<double, 3> at(std::size_t j) const {
    return {fields[0][j], fields[1][j], fields[2][j]};
  }
  /// Throws unless all three fields have n samples and are finite.
  void check(std::size_t n) const;

  friend bool operator==(const ControlSet&, const ControlSet&) = default;
};

/// Update-weight window S(t) ∈ (0, 1], sampled on interval midpoints.
class ShapeFunction {
 public:
  explicit ShapeFunction(std::vector<double> samples);
  static ShapeFunction flat(std::size_t n) { return ShapeFunction(std::vector<double>(n, 1.0)); }

  std::size_t size() const { return samples_.size(); }
  double operator[](std::size_t j) const { return samples_[j]; }
  std::span<const double> samples() const { return samples_; }

 private:
  std::vector<double> samples_;
};

inline constexpr double kShapeFloor = 1e-8;
inline constexpr double kDefaultRampFraction = 0.05;

/// Flat-top window with sin² ramps of length ramp_fraction·T at both ends.
ShapeFunction make_shape(const TimeGrid& grid, double ramp_fraction = kDefaultRampFraction);

namespace guess {
struct Zero {};
struct Constant {
  double value = 0.0;
};
/// E = −B, cancelling the known midpoint field.
struct CancelDrift {};
/// Two Gaussian lobes of opposite sign. Without an amplitude, each lobe is
/// scaled so that its discrete time integral is exactly π/2 in magnitude,
/// the first lobe negative: for E_y that rotates |+⟩ towards |0⟩.
struct KickPair {
  std::optional<double> amplitude;
  double width = 0.0;
  double center1 = 0.0;
  double center2 = 0.0;
};
/// One positive Gaussian lobe; without an amplitude its area is π/2.
struct SplitPeak {
  std::optional<double> amplitude;
  double width = 0.0;
  double center = 0.0;
};
}  // namespace guess

using GuessSpec =
    std::variant<guess::Zero, guess::Constant, guess::CancelDrift, guess::KickPair, guess::SplitPeak>;

inline constexpr double kDefaultKickWidthFraction = 0.02;

/// Kick pair with widths 2% of T, lobes three widths inside either end.
guess::KickPair default_kick_pair(double t_final);
/// Split peak with width 2% of T, three widths after t = 0.
guess::SplitPeak default_split_peak(double t_final);

/// Result of make_guess: the field plus any truncation warnings.
struct GuessField {
  ControlField field;
  std::vector<std::string> warnings;
};

/// Samples a guess on `grid`. `field_midpoint` is B, used by CancelDrift.
GuessField make_guess(const GuessSpec& spec, const TimeGrid& grid, double field_midpoint);

/// Σ_j (λ/S_j)(E_j − E_j^ref)²·dt
double pulse_fluence(const ControlField& field, const ControlField& reference,
                     const ShapeFunction& shape, double lambda, double dt);

/// Two-column CSV "t,value" with interval midpoints in the first column.
void write_field_csv(std::ostream& out, const ControlField& field, const TimeGrid& grid);
/// Reads a field written by write_field_csv; checks its midpoints against `grid`.
ControlField read_field_csv(std::istream& in, const TimeGrid& grid);

}  // namespace qdisc
