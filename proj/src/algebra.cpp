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

#include "qdisc/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qdisc {

namespace {

std::array<double, 2> hermitian_eigenvalues(const ComplexMatrix2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double mean = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), std::abs(m(0, 1)));
  return {mean - rad, mean + rad};
}

ComplexMatrix2 hermitian_part(const ComplexMatrix2& m) {
  ComplexMatrix2 h = (m + m.adjoint()) * cplx(0.5);
  h(0, 0) = h(0, 0).real();
  h(1, 1) = h(1, 1).real();
  return h;
}

double hermiticity_defect(const ComplexMatrix2& m) { return (m - m.adjoint()).max_abs(); }

}  // namespace

ComplexMatrix2 ComplexMatrix2::pauli(int k) {
  switch (k) {
    case 0:
      return sigma_x();
    case 1:
      return sigma_y();
    case 2:
      return sigma_z();
    default:
      throw std::out_of_range("pauli index must be 0, 1 or 2");
  }
}

ComplexMatrix2 ComplexMatrix2::from_pauli(const Vec4& c) {
  return {0.5 * cplx(c[0] + c[3], 0.0), 0.5 * cplx(c[1], -c[2]), 0.5 * cplx(c[1], c[2]),
          0.5 * cplx(c[0] - c[3], 0.0)};
}

Vec4 ComplexMatrix2::to_pauli() const {
  // Real parts only: the coordinates of a Hermitian operator are real.
  Vec4 c;
  c[0] = (e_[0] + e_[3]).real();
  c[1] = (e_[1] + e_[2]).real();
  c[2] = (cplx(0, 1) * (e_[1] - e_[2])).real();
  c[3] = (e_[0] - e_[3]).real();
  return c;
}

ComplexMatrix2 ComplexMatrix2::adjoint() const {
  return {std::conj(e_[0]), std::conj(e_[2]), std::conj(e_[1]), std::conj(e_[3])};
}

bool ComplexMatrix2::all_finite() const {
  return std::all_of(e_.begin(), e_.end(), [](const cplx& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

double ComplexMatrix2::max_abs() const {
  double best = 0.0;
  for (const cplx& z : e_) best = std::max(best, std::abs(z));
  return best;
}

ComplexMatrix2& ComplexMatrix2::operator+=(const ComplexMatrix2& o) {
  for (int i = 0; i < 4; ++i) e_[i] += o.e_[i];
  return *this;
}

ComplexMatrix2& ComplexMatrix2::operator-=(const ComplexMatrix2& o) {
  for (int i = 0; i < 4; ++i) e_[i] -= o.e_[i];
  return *this;
}

ComplexMatrix2& ComplexMatrix2::operator*=(cplx s) {
  for (cplx& z : e_) z *= s;
  return *this;
}

ComplexMatrix2 operator*(const ComplexMatrix2& a, const ComplexMatrix2& b) {
  return {a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
          a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1)};
}

ComplexMatrix2 commutator(const ComplexMatrix2& a, const ComplexMatrix2& b) {
  return a * b - b * a;
}

ComplexMatrix2 anticommutator(const ComplexMatrix2& a, const ComplexMatrix2& b) {
  return a * b + b * a;
}

cplx hs_inner(const ComplexMatrix2& a, const ComplexMatrix2& b) { return (a.adjoint() * b).trace(); }

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

DensityMatrix DensityMatrix::from_matrix(const ComplexMatrix2& m, const Tolerances& tol) {
  if (!m.all_finite()) {
    throw std::invalid_argument("density matrix has non-finite entries");
  }
  const double herm = hermiticity_defect(m);
  if (herm > tol.hermiticity) {
    std::ostringstream msg;
    msg << "density matrix is not Hermitian (defect " << herm << ")";
    throw std::invalid_argument(msg.str());
  }
  const double tr = m.trace().real();
  if (std::fabs(tr - 1.0) > tol.trace) {
    std::ostringstream msg;
    msg << "density matrix trace is " << tr;
    throw std::invalid_argument(msg.str());
  }
  const ComplexMatrix2 h = hermitian_part(m);
  const auto ev = hermitian_eigenvalues(h);
  if (ev[0] < -tol.psd_floor) {
    std::ostringstream msg;
    msg << "density matrix has negative eigenvalue " << ev[0];
    throw std::invalid_argument(msg.str());
  }
  return DensityMatrix(h);
}

DensityMatrix DensityMatrix::from_bloch(const BlochVector& r, const Tolerances& tol) {
  if (!std::isfinite(r.x) || !std::isfinite(r.y) || !std::isfinite(r.z)) {
    throw std::invalid_argument("Bloch vector has non-finite components");
  }
  if (r.norm() > 1.0 + tol.bloch_norm) {
    throw std::invalid_argument("Bloch vector is longer than 1");
  }
  return DensityMatrix(ComplexMatrix2::from_pauli(Vec4{{1.0, r.x, r.y, r.z}}));
}

DensityMatrix DensityMatrix::from_pauli(const Vec4& c, const Tolerances& tol) {
  return from_matrix(ComplexMatrix2::from_pauli(c), tol);
}

DensityMatrix DensityMatrix::pure(cplx amp0, cplx amp1) {
  const double n = std::sqrt(std::norm(amp0) + std::norm(amp1));
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("pure state needs a non-zero finite amplitude vector");
  }
  amp0 /= n;
  amp1 /= n;
  const ComplexMatrix2 m{amp0 * std::conj(amp0), amp0 * std::conj(amp1),
                         amp1 * std::conj(amp0), amp1 * std::conj(amp1)};
  return DensityMatrix(hermitian_part(m));
}

DensityMatrix DensityMatrix::plus() { return pure(1.0, 1.0); }

DensityMatrix DensityMatrix::maximally_mixed() {
  return DensityMatrix(ComplexMatrix2{0.5, 0.0, 0.0, 0.5});
}

std::array<double, 2> DensityMatrix::eigenvalues() const { return hermitian_eigenvalues(m_); }

CoState CoState::from_matrix(const ComplexMatrix2& m, const Tolerances& tol) {
  if (!m.all_finite()) {
    throw std::invalid_argument("co-state has non-finite entries");
  }
  if (hermiticity_defect(m) > tol.hermiticity * std::max(1.0, m.max_abs())) {
    throw std::invalid_argument("co-state is not Hermitian");
  }
  return CoState(hermitian_part(m));
}

CoState CoState::from_pauli(const Vec4& c) { return CoState(ComplexMatrix2::from_pauli(c)); }

BlochVector to_bloch(const DensityMatrix& rho) {
  const Vec4 c = rho.pauli();
  return {c[1], c[2], c[3]};
}

DensityMatrix from_bloch(const BlochVector& r, const Tolerances& tol) {
  return DensityMatrix::from_bloch(r, tol);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  const auto ev = hermitian_eigenvalues(a.matrix() - b.matrix());
  return 0.5 * (std::fabs(ev[0]) + std::fabs(ev[1]));
}

double hilbert_schmidt_distance(const DensityMatrix& a, const DensityMatrix& b) {
  const ComplexMatrix2 d = a.matrix() - b.matrix();
  return 0.5 * hs_inner(d, d).real();
}

double bures_distance(const DensityMatrix& a, const DensityMatrix& b, const Tolerances& tol) {
  auto clamp_radicand = [&](double v, const char* what) {
    if (v >= 0.0) return v;
    if (v >= -tol.bures_radicand) return 0.0;
    std::ostringstream msg;
    msg << "Bures distance: negative " << what << " " << v;
    throw NumericalError(msg.str());
  };
  const double det_a = clamp_radicand(a.matrix().det().real(), "determinant");
  const double det_b = clamp_radicand(b.matrix().det().real(), "determinant");
  const double overlap = (a.matrix() * b.matrix()).trace().real();
  const double fidelity = clamp_radicand(overlap + 2.0 * std::sqrt(det_a * det_b), "fidelity");
  const double d2 = clamp_radicand(2.0 - 2.0 * std::sqrt(fidelity), "squared distance");
  return std::sqrt(d2);
}

double purity(const DensityMatrix& a) { return hs_inner(a.matrix(), a.matrix()).real(); }

double success_probability(const DensityMatrix& a, const DensityMatrix& b) {
  return 0.5 * (1.0 + trace_distance(a, b));
}

}  // namespace qdisc
