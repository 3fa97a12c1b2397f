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
#include <complex>
#include <stdexcept>
#include <string>

#include "qdisc/kernels/kernels.hpp"

namespace qdisc {

using cplx = std::complex<double>;
using kernels::Mat4;
using kernels::Vec4;

/// Raised when a computation produces non-finite or out-of-range numbers.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Numerical slack used by validation and clamping.
 *
 * Every check takes a Tolerances argument defaulting to kDefaultTolerances so
 * tests can tighten or loosen a single bound without touching global state.
 */
struct Tolerances {
  double hermiticity = 1e-12;    // max-abs entry of ρ − ρ†
  double trace = 1e-12;          // |Tr ρ − 1|
  double psd_floor = 1e-12;      // smallest admissible eigenvalue is −psd_floor
  double bloch_norm = 1e-12;     // ‖r‖ ≤ 1 + bloch_norm
  double bures_radicand = 1e-12; // negative radicands above −bures_radicand clamp to 0
};

inline constexpr Tolerances kDefaultTolerances{};

/// Slack for states produced by long propagations.
inline constexpr Tolerances kPropagationTolerances{1e-10, 1e-10, 1e-10, 1e-10, 1e-10};

/// Dense 2×2 complex matrix, row-major.
class ComplexMatrix2 {
 public:
  ComplexMatrix2() = default;
  ComplexMatrix2(cplx m00, cplx m01, cplx m10, cplx m11) : e_{m00, m01, m10, m11} {}

  static ComplexMatrix2 zero() { return {}; }
  static ComplexMatrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static ComplexMatrix2 sigma_x() { return {0.0, 1.0, 1.0, 0.0}; }
  static ComplexMatrix2 sigma_y() { return {0.0, cplx(0, -1), cplx(0, 1), 0.0}; }
  static ComplexMatrix2 sigma_z() { return {1.0, 0.0, 0.0, -1.0}; }
  /// σ_x, σ_y, σ_z for k = 0, 1, 2.
  static ComplexMatrix2 pauli(int k);

  /// A = ½(c0·1 + c·σ) from Pauli coordinates c.
  static ComplexMatrix2 from_pauli(const Vec4& c);
  /// (Tr A, Tr σx A, Tr σy A, Tr σz A)
  Vec4 to_pauli() const;

  cplx& operator()(int r, int c) { return e_[2 * r + c]; }
  const cplx& operator()(int r, int c) const { return e_[2 * r + c]; }

  ComplexMatrix2 adjoint() const;
  cplx trace() const { return e_[0] + e_[3]; }
  cplx det() const { return e_[0] * e_[3] - e_[1] * e_[2]; }
  bool all_finite() const;
  double max_abs() const;

  ComplexMatrix2& operator+=(const ComplexMatrix2& o);
  ComplexMatrix2& operator-=(const ComplexMatrix2& o);
  ComplexMatrix2& operator*=(cplx s);
  friend ComplexMatrix2 operator+(ComplexMatrix2 a, const ComplexMatrix2& b) { return a += b; }
  friend ComplexMatrix2 operator-(ComplexMatrix2 a, const ComplexMatrix2& b) { return a -= b; }
  friend ComplexMatrix2 operator*(ComplexMatrix2 a, cplx s) { return a *= s; }
  friend ComplexMatrix2 operator*(cplx s, ComplexMatrix2 a) { return a *= s; }
  friend ComplexMatrix2 operator*(const ComplexMatrix2& a, const ComplexMatrix2& b);

  friend bool operator==(const ComplexMatrix2&, const ComplexMatrix2&) = default;

 private:
  std::array<cplx, 4> e_{};
};

/// [a, b]
ComplexMatrix2 commutator(const ComplexMatrix2& a, const ComplexMatrix2& b);
/// {a, b}
ComplexMatrix2 anticommutator(const ComplexMatrix2& a, const ComplexMatrix2& b);
/// ⟨a, b⟩ = Tr{a† b}
cplx hs_inner(const ComplexMatrix2& a, const ComplexMatrix2& b);

/// Real Bloch vector with ‖r‖ ≤ 1.
struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  friend BlochVector operator-(const BlochVector& a, const BlochVector& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
};

/// Hermitian, unit-trace, positive semidefinite 2×2 matrix.
class DensityMatrix {
 public:
  /// Validates `m`; throws std::invalid_argument when an invariant fails.
  static DensityMatrix from_matrix(const ComplexMatrix2& m,
                                   const Tolerances& tol = kDefaultTolerances);
  /// ½(1 + r·σ); rejects ‖r‖ > 1 + tol.bloch_norm.
  static DensityMatrix from_bloch(const BlochVector& r,
                                  const Tolerances& tol = kDefaultTolerances);
  /// From Pauli coordinates; used for propagated states.
  static DensityMatrix from_pauli(const Vec4& c, const Tolerances& tol = kPropagationTolerances);
  /// |ψ⟩⟨ψ| for a normalised amplitude pair.
  static DensityMatrix pure(cplx amp0, cplx amp1);

  static DensityMatrix ground() { return pure(1.0, 0.0); }   // |0⟩⟨0|
  static DensityMatrix excited() { return pure(0.0, 1.0); }  // |1⟩⟨1|
  static DensityMatrix plus();                               // |+⟩⟨+|
  static DensityMatrix maximally_mixed();

  const ComplexMatrix2& matrix() const { return m_; }
  Vec4 pauli() const { return m_.to_pauli(); }
  /// Eigenvalues in ascending order.
  std::array<double, 2> eigenvalues() const;

 private:
  explicit DensityMatrix(const ComplexMatrix2& m) : m_(m) {}
  ComplexMatrix2 m_;
};

/// Hermitian adjoint-propagated operator; trace is unconstrained.
class CoState {
 public:
  static CoState from_matrix(const ComplexMatrix2& m,
                             const Tolerances& tol = kPropagationTolerances);
  static CoState from_pauli(const Vec4& c);

  const ComplexMatrix2& matrix() const { return m_; }
  Vec4 pauli() const { return m_.to_pauli(); }

 private:
  explicit CoState(const ComplexMatrix2& m) : m_(m) {}
  ComplexMatrix2 m_;
};

BlochVector to_bloch(const DensityMatrix& rho);
DensityMatrix from_bloch(const BlochVector& r, const Tolerances& tol = kDefaultTolerances);

/// ½‖a − b‖_tr, computed from the eigenvalues of a − b.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);
/// ½⟨a − b, a − b⟩
double hilbert_schmidt_distance(const DensityMatrix& a, const DensityMatrix& b);
/// √(2 − 2√F) with the qubit fidelity F = Tr(ab) + 2√(det a · det b).
double bures_distance(const DensityMatrix& a, const DensityMatrix& b,
                      const Tolerances& tol = kDefaultTolerances);
/// Tr ρ²
double purity(const DensityMatrix& a);
/// ½(1 + D_tr)
double success_probability(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace qdisc
