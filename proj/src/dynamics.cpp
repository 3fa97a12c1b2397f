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

#include "qdisc/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qdisc {

const char* noise_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None:
      return "none";
    case NoiseKind::Relaxation:
      return "relaxation";
    case NoiseKind::Dephasing:
      return "dephasing";
  }
  return "?";
}

LindbladSpec LindbladSpec::relaxation(double t1) {
  if (!(t1 > 0.0) || !std::isfinite(t1)) throw std::invalid_argument("T1 must be positive");
  return {NoiseKind::Relaxation, 1.0 / t1};
}

LindbladSpec LindbladSpec::dephasing(double t2) {
  if (!(t2 > 0.0) || !std::isfinite(t2)) throw std::invalid_argument("T2 must be positive");
  return {NoiseKind::Dephasing, 1.0 / t2};
}

ComplexMatrix2 LindbladSpec::op() const {
  switch (kind) {
    case NoiseKind::Relaxation:
      return {0.0, 1.0, 0.0, 0.0};  // |0⟩⟨1|
    case NoiseKind::Dephasing:
      return ComplexMatrix2::sigma_z();
    case NoiseKind::None:
      break;
  }
  return ComplexMatrix2::zero();
}

ComplexMatrix2 DiscriminationProblem::drift(Hypothesis h) const {
  return ComplexMatrix2::sigma_z() * cplx(0.5 * drift_field(h));
}

void DiscriminationProblem::validate() const {
  if (!std::isfinite(field)) throw std::invalid_argument("field B must be finite");
  if (!(delta_b > 0.0) || !std::isfinite(delta_b)) {
    throw std::invalid_argument("delta_B must be positive");
  }
  if (!(noise.rate >= 0.0) || !std::isfinite(noise.rate)) {
    throw std::invalid_argument("decay rate must be non-negative");
  }
  if (noise.kind == NoiseKind::None && noise.rate != 0.0) {
    throw std::invalid_argument("a decay rate needs a noise kind");
  }
}

ComplexMatrix2 liouvillian_apply(const ComplexMatrix2& drift, const std::array<double, 3>& controls,
                                 const LindbladSpec& noise, const ComplexMatrix2& state) {
  for (double e : controls) {
    if (!std::isfinite(e)) throw NumericalError("liouvillian_apply: non-finite control");
  }
  if (!drift.all_finite() || !state.all_finite() || !std::isfinite(noise.rate)) {
    throw NumericalError("liouvillian_apply: non-finite input");
  }
  ComplexMatrix2 h = drift;
  for (int k = 0; k < 3; ++k) h += ComplexMatrix2::pauli(k) * cplx(0.5 * controls[k]);
  ComplexMatrix2 out = commutator(h, state) * cplx(0.0, -1.0);
  if (noise.kind != NoiseKind::None && noise.rate > 0.0) {
    const ComplexMatrix2 l = noise.op();
    const ComplexMatrix2 ld = l.adjoint();
    const ComplexMatrix2 diss = l * state * ld - anticommutator(ld * l, state) * cplx(0.5);
    out += diss * cplx(noise.rate);
  }
  return out;
}

namespace {

// Bloch-equation generator: ṙ = Ω × r − Γ⊥ r⊥ − Γ∥ (r_z − r_z^ss·Tr ρ).
Mat4 bloch_generator(const std::array<double, 3>& omega, const LindbladSpec& noise) {
  double gamma_perp = 0.0;
  double gamma_par = 0.0;
  double pump = 0.0;  // couples Tr ρ into ṙ_z
  switch (noise.kind) {
    case NoiseKind::Relaxation:
      gamma_perp = 0.5 * noise.rate;
      gamma_par = noise.rate;
      pump = noise.rate;
      break;
    case NoiseKind::Dephasing:
      gamma_perp = 2.0 * noise.rate;
      break;
    case NoiseKind::None:
      break;
  }
  const double wx = omega[0];
  const double wy = omega[1];
  const double wz = omega[2];
  Mat4 m = Mat4::zero();
  m(1, 1) = -gamma_perp;
  m(1, 2) = -wz;
  m(1, 3) = wy;
  m(2, 1) = wz;
  m(2, 2) = -gamma_perp;
  m(2, 3) = -wx;
  m(3, 0) = pump;
  m(3, 1) = -wy;
  m(3, 2) = wx;
  m(3, 3) = -gamma_par;
  return m;
}

std::array<double, 3> drift_vector(const ComplexMatrix2& drift) {
  const Vec4 c = drift.to_pauli();
  return {c[1], c[2], c[3]};
}

void check_finite(const Vec4& v, std::size_t step, const char* what) {
  for (int i = 0; i < 4; ++i) {
    if (!std::isfinite(v[i])) {
      std::ostringstream msg;
      msg << what << ": non-finite state at step " << step;
      throw NumericalError(msg.str());
    }
  }
}

}  // namespace

Mat4 liouvillian_generator(const ComplexMatrix2& drift, const std::array<double, 3>& controls,
                           const LindbladSpec& noise) {
  const auto h = drift_vector(drift);
  return bloch_generator({h[0] + controls[0], h[1] + controls[1], h[2] + controls[2]}, noise);
}

Mat4 control_generator(Control k) {
  std::array<double, 3> axis{0.0, 0.0, 0.0};
  axis[static_cast<int>(k)] = 1.0;
  return bloch_generator(axis, LindbladSpec::none());
}

std::vector<Mat4> step_propagators(const DiscriminationProblem& problem, Hypothesis which,
                                   const ControlSet& fields) {
  const std::size_t n = problem.grid.n_steps();
  fields.check(n);
  const auto& k = kernels::active();
  const auto h = drift_vector(problem.drift(which));
  const double dt = problem.grid.dt();
  std::vector<Mat4> out(n);
  std::array<double, 3> prev{};
  for (std::size_t j = 0; j < n; ++j) {
    const auto e = fields.at(j);
    if (j > 0 && e == prev) {
      out[j] = out[j - 1];
      continue;
    }
    k.expm(bloch_generator({h[0] + e[0], h[1] + e[1], h[2] + e[2]}, problem.noise), dt, out[j]);
    prev = e;
  }
  return out;
}

Trajectory propagate_forward(const DensityMatrix& initial, std::span<const Mat4> propagators) {
  const auto& k = kernels::active();
  std::vector<Vec4> coords(propagators.size() + 1);
  coords[0] = initial.pauli();
  for (std::size_t j = 0; j < propagators.size(); ++j) {
    k.apply(propagators[j], coords[j], coords[j + 1]);
    check_finite(coords[j + 1], j, "propagate_forward");
  }
  return Trajectory(std::move(coords));
}

Trajectory propagate_forward(const DiscriminationProblem& problem, Hypothesis which,
                             const ControlSet& fields) {
  problem.validate();
  const auto props = step_propagators(problem, which, fields);
  return propagate_forward(problem.initial, props);
}

Trajectory propagate_backward(std::span<const Mat4> propagators, const Vec4& terminal) {
  const auto& k = kernels::active();
  const std::size_t n = propagators.size();
  std::vector<Vec4> coords(n + 1);
  coords[n] = terminal;
  check_finite(terminal, n, "propagate_backward");
  for (std::size_t j = n; j-- > 0;) {
    k.apply_transposed(propagators[j], coords[j + 1], coords[j]);
    check_finite(coords[j], j, "propagate_backward");
  }
  return Trajectory(std::move(coords));
}

Trajectory propagate_backward(const DiscriminationProblem& problem, Hypothesis which,
                              const ControlSet& fields, const CoState& terminal) {
  problem.validate();
  const auto props = step_propagators(problem, which, fields);
  return propagate_backward(props, terminal.pauli());
}

std::vector<kernels::PairMeasures> measure_pair(const Trajectory& first, const Trajectory& second) {
  if (first.size() != second.size()) {
    throw std::invalid_argument("measure_pair: trajectories differ in length");
  }
  std::vector<kernels::PairMeasures> out(first.size());
  kernels::active().pair_measures(first.coords(), second.coords(), out);
  return out;
}

}  // namespace qdisc
