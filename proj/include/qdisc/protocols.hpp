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

#include <cstddef>
#include <string>
#include <vector>

#include "qdisc/controls.hpp"
#include "qdisc/dynamics.hpp"

namespace qdisc {

/// π/δB, the shortest time in which drift alone makes |+⟩ perfectly distinguishable.
double qsl_time(double delta_b);

/// Ramsey figures of merit on the grid points of a problem.
struct RamseyResult {
  std::vector<double> times;
  std::vector<double> d_hs;
  std::vector<double> d_tr;
  std::vector<double> purity_1;
  std::vector<double> purity_2;
  std::string notice;  // set when the closed form did not apply
};

/**
 * Free evolution of |+⟩ under the two drifts.
 *
 * The transverse Bloch component decays as e^{−γt/2} (relaxation) or
 * e^{−2γt} (dephasing), so D_tr(t) = a(t)·|sin(δB·t/2)|. Other initial
 * states are propagated numerically and `notice` says so.
 */
RamseyResult ramsey_analytic(const DiscriminationProblem& problem);

/// The rate entering m_analytic: 1/T1 for relaxation, 4/T2 for dephasing.
double m_curve_rate(NoiseKind kind, double decay_time);

/// Closed-form min_t {1 − D_tr} of the Ramsey protocol.
double m_analytic(double delta_b, double gamma);

struct MinimumPoint {
  double m = 1.0;
  std::size_t index = 0;
};

/// min_j {1 − D_tr(ρ1(t_j), ρ2(t_j))} and where it is attained.
MinimumPoint m_numeric_point(const Trajectory& first, const Trajectory& second);
double m_numeric(const Trajectory& first, const Trajectory& second);

/// 4·D_bures²/δB² for states evolved under B ∓ δB/2.
double qfi(const DensityMatrix& rho1_t, const DensityMatrix& rho2_t, double delta_b);

/// Default splitting for QFI evaluation: 1e-3/T.
double qfi_splitting(double t_final);

/// Re-propagates `fields` with splitting `delta_b` (0 selects qfi_splitting)
/// and returns the QFI of the final pair.
double qfi_for_fields(const DiscriminationProblem& problem, const ControlSet& fields,
                      double delta_b = 0.0);

struct MCurve {
  std::vector<double> delta_b_values;
  std::vector<double> m_values;
  double gamma_label = 0.0;  // nominal rate in the m_analytic convention
};

struct EffectiveTimeFit {
  double gamma_eff = 0.0;
  double residual = 0.0;  // RMS misfit in M
  double ratio = 0.0;     // T_eff / T_nominal = gamma_label / gamma_eff
};

/// Least-squares rate such that m_analytic reproduces the curve: a
/// log-spaced scan followed by golden-section refinement in log γ.
/// Throws NumericalError when the optimum sits on the scan boundary.
EffectiveTimeFit fit_effective_time(const MCurve& curve, NoiseKind noise_kind);

/// Geometric family of final times in [lo, hi]·T_QSL, capped at
/// cap·decay_time (no cap for decay_time ≤ 0).
std::vector<double> final_time_family(double delta_b, double decay_time, std::size_t count,
                                      double lo = 0.5, double hi = 16.0, double cap = 10.0);

}  // namespace qdisc
