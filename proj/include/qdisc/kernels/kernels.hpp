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
 * Liouville-space arithmetic kernels for a single qubit.
 *
 * A qubit operator A is represented by its Pauli coordinates
 * (Tr A, Tr σx A, Tr σy A, Tr σz A), so that A = ½(a0·1 + a·σ). In these
 * coordinates every Lindblad superoperator is a real 4×4 matrix, the
 * Hilbert-Schmidt inner product is ½ Σ a_i b_i, and the adjoint
 * superoperator is the plain transpose.
 *
 * Each kernel exists as a portable scalar reference and, on x86-64, as an
 * AVX2/FMA variant where one 4-lane register holds one matrix row or one
 * coordinate vector. The variant is selected once at startup; the
 * QDISC_KERNELS environment variable ("scalar" or "avx2") forces a choice.
 */

#include <cstddef>
#include <span>
#include <string_view>

namespace qdisc::kernels {

/// Row-major real 4×4 matrix.
struct alignas(32) Mat4 {
  double a[16];

  static Mat4 zero() { return Mat4{}; }
  static Mat4 identity() {
    Mat4 m{};
    m.a[0] = m.a[5] = m.a[10] = m.a[15] = 1.0;
    return m;
  }
  double& operator()(int r, int c) { return a[4 * r + c]; }
  double operator()(int r, int c) const { return a[4 * r + c]; }
};

/// Pauli coordinates of one qubit operator.
struct alignas(32) Vec4 {
  double v[4];

  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }
};

/// Pairwise figures of merit for two states given in Pauli coordinates.
struct PairMeasures {
  double d_tr;      // ½‖r1 − r2‖
  double d_hs;      // ½⟨Δ, Δ⟩
  double purity1;   // Tr ρ1²
  double purity2;   // Tr ρ2²
};

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;
  // out = lhs · rhs (out may alias neither input)
  void (*mul)(const Mat4& lhs, const Mat4& rhs, Mat4& out);
  // out = m · x
  void (*apply)(const Mat4& m, const Vec4& x, Vec4& out);
  // out = mᵀ · x
  void (*apply_transposed)(const Mat4& m, const Vec4& x, Vec4& out);
  // out = exp(dt · gen)
  void (*expm)(const Mat4& gen, double dt, Mat4& out);
  // exp(dt·gen) and its directional derivative along dir:
  // d/dε exp(dt·(gen + ε·dir)) at ε = 0.
  void (*expm_frechet)(const Mat4& gen, const Mat4& dir, double dt, Mat4& exp_out,
                       Mat4& deriv_out);
  // Element-wise pair measures over two equally long coordinate sequences.
  void (*pair_measures)(std::span<const Vec4> first, std::span<const Vec4> second,
                        std::span<PairMeasures> out);
};

/// Scalar reference implementation, always available.
const KernelTable& scalar_table();

/// AVX2 implementation, or nullptr when not compiled in or not supported by the CPU.
const KernelTable* avx2_table();

/// Kernel table chosen at startup.
const KernelTable& active();

/// Taylor order and scaling threshold shared by every expm implementation.
inline constexpr int kExpmTaylorOrder = 12;
inline constexpr double kExpmNormThreshold = 0.25;

/// Number of squarings for a generator with max-row-sum norm `norm`.
int expm_squarings(double norm);

}  // namespace qdisc::kernels
