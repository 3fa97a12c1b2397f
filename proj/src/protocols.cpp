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

#include "qdisc/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qdisc {

double qsl_time(double delta_b) {
  if (!(delta_b > 0.0) || !std::isfinite(delta_b)) {
    throw std::invalid_argument("qsl_time: delta_B must be positive");
  }
  return std::numbers::pi / delta_b;
}

namespace {

bool is_plus_state(const DensityMatrix& rho) {
  return (rho.matrix() - DensityMatrix::plus().matrix()).max_abs() <= 1e-12;
}

}  // namespace

RamseyResult ramsey_analytic(const DiscriminationProblem& problem) {
  problem.validate();
  const TimeGrid& grid = problem.grid;
  const std::size_t n = grid.n_steps() + 1;
  RamseyResult out;
  out.times.resize(n);
  out.d_hs.resize(n);
  out.d_tr.resize(n);
  out.purity_1.resize(n);
  out.purity_2.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.times[j] = grid.time(j);

  if (!is_plus_state(problem.initial)) {
    out.notice = "initial state is not |+>; Ramsey curves were propagated numerically";
    const ControlSet zero = ControlSet::zeros(grid.n_steps());
    const Trajectory a = propagate_forward(problem, Hypothesis::Lower, zero);
    const Trajectory b = propagate_forward(problem, Hypothesis::Upper, zero);
    const auto m = measure_pair(a, b);
    for (std::size_t j = 0; j < n; ++j) {
      out.d_tr[j] = m[j].d_tr;
      out.d_hs[j] = m[j].d_hs;
      out.purity_1[j] = m[j].purity1;
      out.purity_2[j] = m[j].purity2;
    }
    return out;
  }

  const double gamma = problem.noise.rate;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = out.times[j];
    double transverse = 1.0;
    double longitudinal = 0.0;
    switch (problem.noise.kind) {
      case NoiseKind::Relaxation:
        transverse = std::exp(-0.5 * gamma * t);
        longitudinal = -std::expm1(-gamma * t);
        break;
      case NoiseKind::Dephasing:
        transverse = std::exp(-2.0 * gamma * t);
        break;
      case NoiseKind::None:
        break;
    }
    const double d_tr = transverse * std::fabs(std::sin(0.5 * problem.delta_b * t));
    const double p = 0.5 * (1.0 + transverse * transverse + longitudinal * longitudinal);
    out.d_tr[j] = d_tr;
    out.d_hs[j] = d_tr * d_tr;
    out.purity_1[j] = p;
    out.purity_2[j] = p;
  }
  return out;
}

double m_curve_rate(NoiseKind kind, double decay_time) {
  if (!(decay_time > 0.0)) throw std::invalid_argument("decay time must be positive");
  switch (kind) {
    case NoiseKind::Relaxation:
      return 1.0 / decay_time;
    case NoiseKind::Dephasing:
      return 4.0 / decay_time;
    case NoiseKind::None:
      break;
  }
  throw std::invalid_argument("m_curve_rate needs a noise kind");
}

double m_analytic(double delta_b, double gamma) {
  if (!(delta_b > 0.0)) throw std::invalid_argument("m_analytic: delta_B must be positive");
  if (!(gamma >= 0.0)) throw std::invalid_argument("m_analytic: gamma must be non-negative");
  if (gamma == 0.0) return 0.0;
  const double b2 = delta_b * delta_b;
  const double g2 = gamma * gamma;
  const double angle = std::acos((g2 - b2) / (g2 + b2));
  const double inner = b2 / (b2 + g2) * std::exp(-(gamma / delta_b) * angle);
  return 1.0 - std::sqrt(inner);
}

MinimumPoint m_numeric_point(const Trajectory& first, const Trajectory& second) {
  const auto m = measure_pair(first, second);
  MinimumPoint best;
  for (std::size_t j = 0; j < m.size(); ++j) {
    const double v = 1.0 - m[j].d_tr;
    if (v < best.m) {
      best.m = v;
      best.index = j;
    }
  }
  return best;
}

double m_numeric(const Trajectory& first, const Trajectory& second) {
  return m_numeric_point(first, second).m;
}

double qfi(const DensityMatrix& rho1_t, const DensityMatrix& rho2_t, double delta_b) {
  if (!(delta_b > 0.0)) throw std::invalid_argument("qfi: delta_B must be positive");
  const double d = bures_distance(rho1_t, rho2_t);
  return 4.0 * d * d / (delta_b * delta_b);
}

double qfi_splitting(double t_final) { return 1e-3 / t_final; }

double qfi_for_fields(const DiscriminationProblem& problem, const ControlSet& fields,
                      double delta_b) {
  DiscriminationProblem p = problem;
  p.delta_b = delta_b > 0.0 ? delta_b : qfi_splitting(problem.grid.t_final());
  const Trajectory a = propagate_forward(p, Hypothesis::Lower, fields);
  const Trajectory b = propagate_forward(p, Hypothesis::Upper, fields);
  return qfi(a.state(a.size() - 1), b.state(b.size() - 1), p.delta_b);
}

namespace {

double fit_loss(const MCurve& c, double gamma) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.m_values.size(); ++i) {
    const double d = m_analytic(c.delta_b_values[i], gamma) - c.m_values[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(c.m_values.size()));
}

constexpr std::size_t kScanPoints = 801;
constexpr double kScanDecades = 4.0;  // below min δB and above max δB

}  // namespace

EffectiveTimeFit fit_effective_time(const MCurve& curve, NoiseKind noise_kind) {
  if (noise_kind == NoiseKind::None) {
    throw std::invalid_argument("fit_effective_time needs a noise kind");
  }
  const std::size_t n = curve.delta_b_values.size();
  if (n != curve.m_values.size()) throw std::invalid_argument("M curve columns differ in length");
  if (n < 5) throw std::invalid_argument("fit_effective_time needs at least 5 points");
  const auto [lo_it, hi_it] =
      std::minmax_element(curve.delta_b_values.begin(), curve.delta_b_values.end());
  if (!(*lo_it > 0.0)) throw std::invalid_argument("delta_B values must be positive");
  if (*hi_it / *lo_it < 10.0 * (1.0 - 1e-9)) {
    throw std::invalid_argument("fit_effective_time needs delta_B spanning a decade");
  }
  for (double m : curve.m_values) {
    if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("M values must lie in [0, 1]");
  }

  const double log_lo = std::log(*lo_it) - kScanDecades * std::numbers::ln10;
  const double log_hi = std::log(*hi_it) + kScanDecades * std::numbers::ln10;
  const double step = (log_hi - log_lo) / static_cast<double>(kScanPoints - 1);
  std::size_t best = 0;
  double best_loss = INFINITY;
  for (std::size_t i = 0; i < kScanPoints; ++i) {
    const double loss = fit_loss(curve, std::exp(log_lo + step * static_cast<double>(i)));
    if (loss < best_loss) {
      best_loss = loss;
      best = i;
    }
  }
  if (best == 0 || best == kScanPoints - 1) {
    throw NumericalError("effective-time fit pinned to the scan boundary");
  }

  // Golden-section search on log γ inside the bracketing scan cells.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = log_lo + step * static_cast<double>(best - 1);
  double b = log_lo + step * static_cast<double>(best + 1);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = fit_loss(curve, std::exp(c));
  double fd = fit_loss(curve, std::exp(d));
  int iterations = 0;
  while (b - a > 1e-13 && iterations < 200) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = fit_loss(curve, std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = fit_loss(curve, std::exp(d));
    }
    ++iterations;
  }
  if (b - a > 1e-8) throw NumericalError("effective-time fit did not converge");

  EffectiveTimeFit fit;
  fit.gamma_eff = std::exp(0.5 * (a + b));
  fit.residual = fit_loss(curve, fit.gamma_eff);
  fit.ratio = curve.gamma_label > 0.0 ? curve.gamma_label / fit.gamma_eff : 0.0;
  return fit;
}

std::vector<double> final_time_family(double delta_b, double decay_time, std::size_t count,
                                      double lo, double hi, double cap) {
  if (count == 0) throw std::invalid_argument("final_time_family: count must be positive");
  if (!(lo > 0.0 && hi >= lo)) throw std::invalid_argument("final_time_family: bad range");
  const double tq = qsl_time(delta_b);
  const double lower = lo * tq;
  double upper = hi * tq;
  if (decay_time > 0.0 && cap > 0.0) upper = std::min(upper, cap * decay_time);
  upper = std::max(upper, lower);
  if (count == 1 || upper == lower) return {lower};
  std::vector<double> out(count);
  const double ratio = std::log(upper / lower) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lower * std::exp(ratio * static_cast<double>(i));
  out.back() = upper;
  return out;
}

}  // namespace qdisc
