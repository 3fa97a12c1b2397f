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

#include "qdisc/controls.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qdisc/format.hpp"

namespace qdisc {

TimeGrid::TimeGrid(double t_final, std::size_t n_steps) : t_final_(t_final), n_steps_(n_steps) {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("time grid needs a positive finite final time");
  }
  if (n_steps == 0) {
    throw std::invalid_argument("time grid needs at least one step");
  }
}

TimeGrid default_grid(double t_final, double delta_b, double decay_time, const GridPolicy& policy) {
  double n = policy.points_per_unit_time * t_final;
  if (delta_b > 0.0) {
    n = std::max(n, policy.points_per_period * t_final * delta_b / (2.0 * std::numbers::pi));
  }
  if (decay_time > 0.0) {
    n = std::max(n, policy.points_per_decay * t_final / decay_time);
  }
  return TimeGrid(t_final, static_cast<std::size_t>(std::max(1.0, std::ceil(n))));
}

const char* control_name(Control k) {
  switch (k) {
    case Control::X:
      return "x";
    case Control::Y:
      return "y";
    case Control::Z:
      return "z";
  }
  return "?";
}

ControlField::ControlField(std::vector<double> samples) : samples_(std::move(samples)) {
  for (double v : samples_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("control field has non-finite samples");
    }
  }
}

void ControlSet::check(std::size_t n) const {
  for (Control k : kAllControls) {
    if ((*this)[k].size() != n) {
      std::ostringstream msg;
      msg << "control field " << control_name(k) << " has " << (*this)[k].size()
          << " samples, grid has " << n << " intervals";
      throw std::invalid_argument(msg.str());
    }
  }
}

ShapeFunction::ShapeFunction(std::vector<double> samples) : samples_(std::move(samples)) {
  for (double v : samples_) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw std::invalid_argument("shape function values must lie in (0, 1]");
    }
  }
}

ShapeFunction make_shape(const TimeGrid& grid, double ramp_fraction) {
  if (!(ramp_fraction >= 0.0 && ramp_fraction <= 0.5)) {
    throw std::invalid_argument("ramp fraction must lie in [0, 0.5]");
  }
  const std::size_t n = grid.n_steps();
  std::vector<double> s(n, 1.0);
  if (ramp_fraction > 0.0) {
    const double ramp = ramp_fraction * grid.t_final();
    for (std::size_t j = 0; j < n; ++j) {
      // Distance to the nearer end; evaluating from the mirrored index keeps
      // S(t) = S(T − t) exact up to the midpoint rounding.
      const double t = std::min(grid.midpoint(j), grid.midpoint(n - 1 - j));
      if (t < ramp) {
        const double v = std::sin(0.5 * std::numbers::pi * t / ramp);
        s[j] = std::max(kShapeFloor, v * v);
      }
    }
  }
  return ShapeFunction(std::move(s));
}

guess::KickPair default_kick_pair(double t_final) {
  const double w = kDefaultKickWidthFraction * t_final;
  return {std::nullopt, w, 3.0 * w, t_final - 3.0 * w};
}

guess::SplitPeak default_split_peak(double t_final) {
  const double w = kDefaultKickWidthFraction * t_final;
  return {std::nullopt, w, 3.0 * w};
}

namespace {

constexpr double kLobeExtent = 3.0;  // widths on either side counted as the lobe

std::vector<double> gaussian_lobe(const TimeGrid& grid, double center, double width,
                                  std::vector<std::string>& warnings, const char* label) {
  if (!(width > 0.0)) {
    throw std::invalid_argument(std::string(label) + ": width must be positive");
  }
  if (center < 0.0 || center > grid.t_final()) {
    throw std::invalid_argument(std::string(label) + ": center outside [0, T]");
  }
  if (center - kLobeExtent * width < 0.0 || center + kLobeExtent * width > grid.t_final()) {
    warnings.push_back(std::string(label) + ": lobe extends beyond [0, T] and is truncated");
  }
  std::vector<double> g(grid.n_steps());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double u = (grid.midpoint(j) - center) / width;
    g[j] = std::exp(-0.5 * u * u);
  }
  return g;
}

double discrete_area(const std::vector<double>& g, double dt) {
  double s = 0.0;
  for (double v : g) s += v;
  return s * dt;
}

}  // namespace

GuessField make_guess(const GuessSpec& spec, const TimeGrid& grid, double field_midpoint) {
  const std::size_t n = grid.n_steps();
  const double quarter_turn = 0.5 * std::numbers::pi;
  GuessField out;
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, guess::Zero>) {
          out.field = ControlField::zeros(n);
        } else if constexpr (std::is_same_v<T, guess::Constant>) {
          out.field = ControlField::constant(n, g.value);
        } else if constexpr (std::is_same_v<T, guess::CancelDrift>) {
          out.field = ControlField::constant(n, -field_midpoint);
        } else if constexpr (std::is_same_v<T, guess::KickPair>) {
          const auto first = gaussian_lobe(grid, g.center1, g.width, out.warnings, "kick 1");
          const auto second = gaussian_lobe(grid, g.center2, g.width, out.warnings, "kick 2");
          double a1 = 0.0;
          double a2 = 0.0;
          if (g.amplitude) {
            a1 = *g.amplitude;
            a2 = -*g.amplitude;
          } else {
            a1 = -quarter_turn / discrete_area(first, grid.dt());
            a2 = quarter_turn / discrete_area(second, grid.dt());
          }
          std::vector<double> e(n);
          for (std::size_t j = 0; j < n; ++j) e[j] = a1 * first[j] + a2 * second[j];
          out.field = ControlField(std::move(e));
        } else if constexpr (std::is_same_v<T, guess::SplitPeak>) {
          const auto lobe = gaussian_lobe(grid, g.center, g.width, out.warnings, "split peak");
          const double a =
              g.amplitude ? *g.amplitude : quarter_turn / discrete_area(lobe, grid.dt());
          std::vector<double> e(n);
          for (std::size_t j = 0; j < n; ++j) e[j] = a * lobe[j];
          out.field = ControlField(std::move(e));
        }
      },
      spec);
  return out;
}

double pulse_fluence(const ControlField& field, const ControlField& reference,
                     const ShapeFunction& shape, double lambda, double dt) {
  if (field.size() != reference.size() || field.size() != shape.size()) {
    throw std::invalid_argument("pulse_fluence: length mismatch");
  }
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("pulse_fluence: lambda must be positive");
  }
  double s = 0.0;
  for (std::size_t j = 0; j < field.size(); ++j) {
    const double d = field[j] - reference[j];
    s += d * d / shape[j];
  }
  return lambda * s * dt;
}

void write_field_csv(std::ostream& out, const ControlField& field, const TimeGrid& grid) {
  if (field.size() != grid.n_steps()) {
    throw std::invalid_argument("write_field_csv: field does not match grid");
  }
  out << "t,value\n";
  for (std::size_t j = 0; j < field.size(); ++j) {
    out << format_number(grid.midpoint(j)) << ',' << format_number(field[j]) << '\n';
  }
}

ControlField read_field_csv(std::istream& in, const TimeGrid& grid) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,value", 0) != 0) {
    throw std::invalid_argument("field CSV must start with the header 't,value'");
  }
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::invalid_argument("field CSV line " + std::to_string(line_no) + ": expected 2 columns");
    }
    double t = 0.0;
    double v = 0.0;
    try {
      t = std::stod(line.substr(0, comma));
      v = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("field CSV line " + std::to_string(line_no) + ": not a number");
    }
    const std::size_t j = values.size();
    if (j >= grid.n_steps() ||
        std::fabs(t - grid.midpoint(j)) > 1e-9 * std::max(1.0, grid.t_final())) {
      throw std::invalid_argument("field CSV line " + std::to_string(line_no) +
                                  ": time does not match the configured grid");
    }
    values.push_back(v);
  }
  if (values.size() != grid.n_steps()) {
    throw std::invalid_argument("field CSV has " + std::to_string(values.size()) +
                                " samples, grid has " + std::to_string(grid.n_steps()));
  }
  return ControlField(std::move(values));
}

}  // namespace qdisc
