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
#include <span>
#include <vector>

#include "qdisc/algebra.hpp"
#include "qdisc/controls.hpp"

namespace qdisc {

enum class NoiseKind { None, Relaxation, Dephasing };
const char* noise_name(NoiseKind kind);

/**
 * A single dissipation channel.
 *
 * Relaxation uses L = |0⟩⟨1| with rate 1/T1, dephasing uses L = σ_z with
 * rate 1/T2. Channels are never combined.
 */
struct LindbladSpec {
  NoiseKind kind = NoiseKind::None;
  double rate = 0.0;

  static LindbladSpec none() { return {}; }
  static LindbladSpec relaxation(double t1);
  static LindbladSpec dephasing(double t2);

  /// The Lindblad operator; zero for NoiseKind::None.
  ComplexMatrix2 op() const;
  /// 1/rate, or 0 without noise.
  double decay_time() const { return rate > 0.0 ? 1.0 / rate : 0.0; }
};

/// Which of the two drifts a state evolves under.
enum class Hypothesis { Lower = 0, Upper = 1 };  // B − δB/2, B + δB/2
inline constexpr std::array<Hypothesis, 2> kBothHypotheses{Hypothesis::Lower, Hypothesis::Upper};

struct DiscriminationProblem {
  double field = 1.0;  // B; time is measured in units of 1/B
  double delta_b = 0.0;
  LindbladSpec noise;
  DensityMatrix initial = DensityMatrix::plus();
  TimeGrid grid{1.0, 1};

  double drift_field(Hypothesis h) const {
    return h == Hypothesis::Lower ? field - 0.5 * delta_b : field + 0.5 * delta_b;
  }
  /// (B ∓ δB/2)·σ_z/2
  ComplexMatrix2 drift(Hypothesis h) const;
  void validate() const;
};

/// Pauli-coordinate samples at every grid point t_0..t_N.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<Vec4> coords) : coords_(std::move(coords)) {}

  std::size_t size() const { return coords_.size(); }
  const Vec4& pauli(std::size_t j) const { return coords_[j]; }
  const Vec4& back() const { return coords_.back(); }
  std::span<const Vec4> coords() const { return coords_; }

  DensityMatrix state(std::size_t j) const { return DensityMatrix::from_pauli(coords_[j]); }
  CoState costate(std::size_t j) const { return CoState::from_pauli(coords_[j]); }
  BlochVector bloch(std::size_t j) const {
    return {coords_[j][1], coords_[j][2], coords_[j][3]};
  }

 private:
  std::vector<Vec4> coords_;
};

/// −i[H_d + ½ E·σ, ρ] + γ(LρL† − ½{L†L, ρ}), evaluated with 2×2 matrix algebra.
ComplexMatrix2 liouvillian_apply(const ComplexMatrix2& drift, const std::array<double, 3>& controls,
                                 const LindbladSpec& noise, const ComplexMatrix2& state);

/// The same Liouvillian as a real 4×4 matrix acting on Pauli coordinates.
Mat4 liouvillian_generator(const ComplexMatrix2& drift, const std::array<double, 3>& controls,
                           const LindbladSpec& noise);

/// ∂L/∂E_k : ρ ↦ −(i/2)[σ_k, ρ] in Pauli coordinates.
Mat4 control_generator(Control k);

/// exp(dt·L_j) for every interval j, L_j built from the fields on interval j.
std::vector<Mat4> step_propagators(const DiscriminationProblem& problem, Hypothesis which,
                                   const ControlSet& fields);

/// ρ(t_j) for j = 0..N, starting from problem.initial.
Trajectory propagate_forward(const DiscriminationProblem& problem, Hypothesis which,
                             const ControlSet& fields);
Trajectory propagate_forward(const DensityMatrix& initial, std::span<const Mat4> propagators);

/// χ(t_j) for j = 0..N with χ(t_N) = terminal and χ(t_j) = U_jᵀ χ(t_{j+1}),
/// which keeps ⟨χ(t), ρ(t)⟩ constant along the paired forward trajectory.
Trajectory propagate_backward(const DiscriminationProblem& problem, Hypothesis which,
                              const ControlSet& fields, const CoState& terminal);
Trajectory propagate_backward(std::span<const Mat4> propagators, const Vec4& terminal);

/// Re⟨a, b⟩ for operators in Pauli coordinates.
inline double pauli_inner(const Vec4& a, const Vec4& b) {
  return 0.5 * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]);
}

/// Pointwise D_tr, D_HS and purities of two equally long trajectories.
std::vector<kernels::PairMeasures> measure_pair(const Trajectory& first, const Trajectory& second);

}  // namespace qdisc
