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

/**
 * Krotov's method for the two-state discrimination functional
 * J_T = 1 − D_HS(ρ1(T), ρ2(T)).
 *
 * One iteration propagates the co-states χ_m backwards with the old fields,
 * then sweeps forward in time: on interval j every unmasked field is shifted
 * by (S_j/λ_k)·Re Σ_m ⟨χ_m(t_j), ∂L/∂E_k ρ_m(t_j)⟩ using the freshly
 * propagated ρ_m(t_j), after which both states advance one step under the
 * new values. The previous iterate is the reference field, so the running
 * cost of an accepted step is the fluence of the change.
 */

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "qdisc/controls.hpp"
#include "qdisc/dynamics.hpp"

namespace qdisc {

struct KrotovConfig {
  std::array<double, 3> lambda{1.0, 1.0, 1.0};
  int max_iterations = 500;
  double delta_jt_tolerance = 1e-7;
  std::array<bool, 3> optimize_mask{true, true, true};
  /// Allowed J_T increase per iteration before the step is rejected.
  double monotonicity_slack = 1e-10;
  /// λ multiplier applied to a rejected step.
  double lambda_backoff = 2.0;
  /// Rejected steps tolerated within one iteration before giving up.
  int max_backoffs = 40;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double j_t = 0.0;
  double g = 0.0;         // running cost of the accepted change
  double fluence = 0.0;   // Σ_k ∫ E_k² dt of the new fields
  std::array<double, 3> lambda{};
  int rejected = 0;       // backoffs spent on this iteration
};

struct KrotovState {
  ControlSet fields;
  std::array<Trajectory, 2> forward;
  std::array<Trajectory, 2> costates;  // empty until backward_pass
  std::array<std::vector<Mat4>, 2> propagators;
  std::vector<double> jt_history;
  std::vector<double> g_history;
  std::vector<IterationRecord> log;
  std::vector<std::string> warnings;
  bool converged = false;
  std::string stop_reason;

  double j_t() const { return jt_history.back(); }
  DensityMatrix final_state(Hypothesis h) const {
    return forward[static_cast<int>(h)].state(forward[static_cast<int>(h)].size() - 1);
  }
};

/// 1 − D_HS(ρ1, ρ2)
double evaluate_jt(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// χ_m(T) = −∇_{ρ_m(T)} J_T, i.e. (ρ1 − ρ2, ρ2 − ρ1).
std::array<CoState, 2> costate_terminal(const DensityMatrix& rho1, const DensityMatrix& rho2);

/// Σ_k ∫ E_k² dt
double total_fluence(const ControlSet& fields, double dt);

/// Propagates both states under `fields`; co-states are left empty.
KrotovState initial_state(const DiscriminationProblem& problem, const ControlSet& fields);

/// Fills state.costates from the stored propagators and final states.
void backward_pass(KrotovState& state);

/// One sequential forward sweep with field updates. Requires co-states.
/// The returned state carries the new fields, trajectories, propagators and
/// J_T appended to the history; its co-states are empty.
KrotovState field_update_step(const KrotovState& state, const KrotovConfig& config,
                              const DiscriminationProblem& problem,
                              const std::array<ShapeFunction, 3>& shapes);

using IterationCallback = std::function<void(const IterationRecord&)>;

/// Iterates until ΔJ_T < tolerance or max_iterations. Rejected steps are
/// retried with λ multiplied by lambda_backoff; NumericalError is thrown
/// once max_backoffs is exhausted.
KrotovState optimize(const DiscriminationProblem& problem, const ControlSet& guess,
                     const KrotovConfig& config, const std::array<ShapeFunction, 3>& shapes,
                     const IterationCallback& on_iteration = {});

KrotovState optimize(const DiscriminationProblem& problem, const std::array<GuessSpec, 3>& guesses,
                     const KrotovConfig& config, const std::array<ShapeFunction, 3>& shapes,
                     const IterationCallback& on_iteration = {});

/// J_T for the given fields.
double jt_for_fields(const DiscriminationProblem& problem, const ControlSet& fields);

/// Exact ∂J_T/∂E_k(interval j) of the discretised dynamics, from the
/// pairing −Σ_m ⟨χ_m(t_{j+1}), (∂U_{m,j}/∂E_k) ρ_m(t_j)⟩.
std::array<std::vector<double>, 3> jt_gradient(const DiscriminationProblem& problem,
                                               const ControlSet& fields);

}  // namespace qdisc
