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

#include "qdisc/krotov.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qdisc {

void KrotovConfig::validate() const {
  for (double l : lambda) {
    if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("lambda must be positive");
  }
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
  if (!(delta_jt_tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (!(monotonicity_slack >= 0.0)) throw std::invalid_argument("slack must be non-negative");
  if (!(lambda_backoff > 1.0)) throw std::invalid_argument("lambda backoff must exceed 1");
  if (max_backoffs < 0) throw std::invalid_argument("max_backoffs must be non-negative");
}

double evaluate_jt(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  return 1.0 - hilbert_schmidt_distance(rho1, rho2);
}

std::array<CoState, 2> costate_terminal(const DensityMatrix& rho1, const DensityMatrix& rho2) {
  const ComplexMatrix2 delta = rho1.matrix() - rho2.matrix();
  return {CoState::from_matrix(delta), CoState::from_matrix(delta * cplx(-1.0))};
}

double total_fluence(const ControlSet& fields, double dt) {
  double s = 0.0;
  for (const auto& f : fields.fields) {
    for (double v : f.samples()) s += v * v;
  }
  return s * dt;
}

namespace {

double jt_from_coords(const Vec4& a, const Vec4& b) {
  kernels::PairMeasures m{};
  kernels::active().pair_measures(std::span(&a, 1), std::span(&b, 1), std::span(&m, 1));
  return 1.0 - m.d_hs;
}

// Re⟨χ, ∂L/∂E_k ρ⟩ = ½ c·(e_k × r) for χ = ½(c0 + c·σ), ρ = ½(1 + r·σ).
double control_pairing(const Vec4& chi, const Vec4& rho, int k) {
  switch (k) {
    case 0:
      return 0.5 * (-chi[2] * rho[3] + chi[3] * rho[2]);
    case 1:
      return 0.5 * (chi[1] * rho[3] - chi[3] * rho[1]);
    default:
      return 0.5 * (-chi[1] * rho[2] + chi[2] * rho[1]);
  }
}

}  // namespace

KrotovState initial_state(const DiscriminationProblem& problem, const ControlSet& fields) {
  problem.validate();
  fields.check(problem.grid.n_steps());
  KrotovState s;
  s.fields = fields;
  for (Hypothesis h : kBothHypotheses) {
    const int m = static_cast<int>(h);
    s.propagators[m] = step_propagators(problem, h, fields);
    s.forward[m] = propagate_forward(problem.initial, s.propagators[m]);
  }
  s.jt_history.push_back(jt_from_coords(s.forward[0].back(), s.forward[1].back()));
  return s;
}

void backward_pass(KrotovState& state) {
  const Vec4& r1 = state.forward[0].back();
  const Vec4& r2 = state.forward[1].back();
  Vec4 delta;
  Vec4 minus_delta;
  for (int i = 0; i < 4; ++i) {
    delta[i] = r1[i] - r2[i];
    minus_delta[i] = -delta[i];
  }
  state.costates[0] = propagate_backward(state.propagators[0], delta);
  state.costates[1] = propagate_backward(state.propagators[1], minus_delta);
}

KrotovState field_update_step(const KrotovState& state, const KrotovConfig& config,
                              const DiscriminationProblem& problem,
                              const std::array<ShapeFunction, 3>& shapes) {
  const std::size_t n = problem.grid.n_steps();
  for (const auto& chi : state.costates) {
    if (chi.size() != n + 1) {
      throw std::logic_error("field_update_step: co-states missing; run backward_pass first");
    }
  }
  for (const auto& s : shapes) {
    if (s.size() != n) throw std::invalid_argument("shape function does not match grid");
  }
  const auto& kern = kernels::active();
  const double dt = problem.grid.dt();
  const std::array<Vec4, 2> drift{problem.drift(Hypothesis::Lower).to_pauli(),
                                  problem.drift(Hypothesis::Upper).to_pauli()};

  KrotovState next;
  next.fields = state.fields;
  next.jt_history = state.jt_history;
  next.g_history = state.g_history;
  next.log = state.log;
  next.warnings = state.warnings;
  std::array<std::vector<Vec4>, 2> rho;
  for (int m = 0; m < 2; ++m) {
    rho[m].resize(n + 1);
    rho[m][0] = problem.initial.pauli();
    next.propagators[m].resize(n);
  }

  for (std::size_t j = 0; j < n; ++j) {
    for (int k = 0; k < 3; ++k) {
      if (!config.optimize_mask[k]) continue;
      double pairing = 0.0;
      for (int m = 0; m < 2; ++m) {
        pairing += control_pairing(state.costates[m].pauli(j), rho[m][j], k);
      }
      const double updated =
          state.fields.fields[k][j] + shapes[k][j] / config.lambda[k] * pairing;
      if (!std::isfinite(updated)) {
        std::ostringstream msg;
        msg << "non-finite update of E_" << control_name(static_cast<Control>(k))
            << " at step " << j << " (lambda " << config.lambda[k] << " too small?)";
        throw NumericalError(msg.str());
      }
      next.fields.fields[k][j] = updated;
    }
    const auto e = next.fields.at(j);
    for (int m = 0; m < 2; ++m) {
      const ComplexMatrix2 h = ComplexMatrix2::from_pauli(drift[m]);
      kern.expm(liouvillian_generator(h, e, problem.noise), dt, next.propagators[m][j]);
      kern.apply(next.propagators[m][j], rho[m][j], rho[m][j + 1]);
      for (int i = 0; i < 4; ++i) {
        if (!std::isfinite(rho[m][j + 1][i])) {
          std::ostringstream msg;
          msg << "non-finite state after step " << j;
          throw NumericalError(msg.str());
        }
      }
    }
  }

  for (int m = 0; m < 2; ++m) next.forward[m] = Trajectory(std::move(rho[m]));
  next.jt_history.push_back(jt_from_coords(next.forward[0].back(), next.forward[1].back()));
  double g = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (!config.optimize_mask[k]) continue;
    g += pulse_fluence(next.fields.fields[k], state.fields.fields[k], shapes[k], config.lambda[k],
                       dt);
  }
  next.g_history.push_back(g);
  return next;
}

KrotovState optimize(const DiscriminationProblem& problem, const ControlSet& guess,
                     const KrotovConfig& config, const std::array<ShapeFunction, 3>& shapes,
                     const IterationCallback& on_iteration) {
  config.validate();
  KrotovState state = initial_state(problem, guess);
  KrotovConfig cfg = config;
  const double dt = problem.grid.dt();
  {
    IterationRecord rec;
    rec.j_t = state.j_t();
    rec.fluence = total_fluence(state.fields, dt);
    rec.lambda = cfg.lambda;
    state.log.push_back(rec);
    if (on_iteration) on_iteration(rec);
  }

  const bool anything_free =
      cfg.optimize_mask[0] || cfg.optimize_mask[1] || cfg.optimize_mask[2];
  if (!anything_free) {
    state.converged = true;
    state.stop_reason = "all controls masked";
    backward_pass(state);
    return state;
  }

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    backward_pass(state);
    int rejected = 0;
    while (true) {
      std::string failure;
      try {
        KrotovState next = field_update_step(state, cfg, problem, shapes);
        if (next.j_t() <= state.j_t() + cfg.monotonicity_slack) {
          const double improvement = state.j_t() - next.j_t();
          IterationRecord rec;
          rec.iteration = it;
          rec.j_t = next.j_t();
          rec.g = next.g_history.back();
          rec.fluence = total_fluence(next.fields, dt);
          rec.lambda = cfg.lambda;
          rec.rejected = rejected;
          next.log.push_back(rec);
          if (on_iteration) on_iteration(rec);
          state = std::move(next);
          if (improvement < cfg.delta_jt_tolerance) {
            state.converged = true;
            state.stop_reason = "delta J_T below tolerance";
          }
          break;
        }
        std::ostringstream msg;
        msg << "J_T rose from " << state.j_t() << " to " << next.j_t();
        failure = msg.str();
      } catch (const NumericalError& e) {
        failure = e.what();
      }
      if (++rejected > cfg.max_backoffs) {
        std::ostringstream msg;
        msg << "Krotov iteration " << it << " failed after " << cfg.max_backoffs
            << " lambda backoffs: " << failure;
        throw NumericalError(msg.str());
      }
      for (double& l : cfg.lambda) l *= cfg.lambda_backoff;
    }
    if (state.converged) break;
  }
  if (!state.converged) state.stop_reason = "iteration limit reached";
  backward_pass(state);
  return state;
}

KrotovState optimize(const DiscriminationProblem& problem, const std::array<GuessSpec, 3>& guesses,
                     const KrotovConfig& config, const std::array<ShapeFunction, 3>& shapes,
                     const IterationCallback& on_iteration) {
  ControlSet fields;
  std::vector<std::string> warnings;
  for (int k = 0; k < 3; ++k) {
    GuessField g = make_guess(guesses[k], problem.grid, problem.field);
    fields.fields[k] = std::move(g.field);
    for (auto& w : g.warnings) {
      warnings.push_back(std::string("E_") + control_name(static_cast<Control>(k)) + ": " + w);
    }
  }
  KrotovState s = optimize(problem, fields, config, shapes, on_iteration);
  s.warnings.insert(s.warnings.begin(), warnings.begin(), warnings.end());
  return s;
}

double jt_for_fields(const DiscriminationProblem& problem, const ControlSet& fields) {
  return initial_state(problem, fields).j_t();
}

std::array<std::vector<double>, 3> jt_gradient(const DiscriminationProblem& problem,
                                               const ControlSet& fields) {
  KrotovState s = initial_state(problem, fields);
  backward_pass(s);
  const auto& kern = kernels::active();
  const std::size_t n = problem.grid.n_steps();
  const double dt = problem.grid.dt();
  std::array<Mat4, 3> directions{control_generator(Control::X), control_generator(Control::Y),
                                 control_generator(Control::Z)};
  std::array<std::vector<double>, 3> grad;
  for (auto& g : grad) g.assign(n, 0.0);
  for (Hypothesis h : kBothHypotheses) {
    const int m = static_cast<int>(h);
    const ComplexMatrix2 drift = problem.drift(h);
    for (std::size_t j = 0; j < n; ++j) {
      const Mat4 gen = liouvillian_generator(drift, fields.at(j), problem.noise);
      for (int k = 0; k < 3; ++k) {
        Mat4 u;
        Mat4 du;
        kern.expm_frechet(gen, directions[k], dt, u, du);
        Vec4 moved;
        kern.apply(du, s.forward[m].pauli(j), moved);
        grad[k][j] -= pauli_inner(s.costates[m].pauli(j + 1), moved);
      }
    }
  }
  return grad;
}

}  // namespace qdisc
