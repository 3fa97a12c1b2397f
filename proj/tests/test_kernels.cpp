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

#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "qdisc/dynamics.hpp"
#include "qdisc/kernels/kernels.hpp"
#include "random_states.hpp"

using namespace qdisc;
using kernels::Mat4;
using kernels::Vec4;

namespace {

Eigen::Matrix4d to_eigen(const Mat4& m) {
  Eigen::Matrix4d e;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) e(r, c) = m(r, c);
  return e;
}

double max_diff(const Mat4& a, const Mat4& b) {
  double d = 0.0;
  for (int i = 0; i < 16; ++i) d = std::max(d, std::fabs(a.a[i] - b.a[i]));
  return d;
}

double max_abs(const Mat4& a) {
  double d = 0.0;
  for (double v : a.a) d = std::max(d, std::fabs(v));
  return d;
}

double max_diff(const Eigen::Matrix4d& a, const Mat4& b) { return (a - to_eigen(b)).cwiseAbs().maxCoeff(); }

Mat4 random_matrix(testing::Sampler& s, double scale) {
  Mat4 m;
  for (double& v : m.a) v = scale * s.normal();
  return m;
}

Mat4 random_generator(testing::Sampler& s) {
  const double b = s.uniform(-2.0, 2.0);
  const ComplexMatrix2 drift = ComplexMatrix2::sigma_z() * cplx(0.5 * b);
  const std::array<double, 3> e{s.uniform(-1, 1), s.uniform(-1, 1), s.uniform(-1, 1)};
  const int kind = static_cast<int>(s.index(3));
  const LindbladSpec noise = kind == 0   ? LindbladSpec::none()
                             : kind == 1 ? LindbladSpec::relaxation(s.uniform(0.5, 1e4))
                                         : LindbladSpec::dephasing(s.uniform(0.5, 1e4));
  return liouvillian_generator(drift, e, noise);
}

Vec4 random_vec(testing::Sampler& s) { return {{s.normal(), s.normal(), s.normal(), s.normal()}}; }

std::vector<const kernels::KernelTable*> tables() {
  std::vector<const kernels::KernelTable*> t{&kernels::scalar_table()};
  if (const auto* a = kernels::avx2_table()) t.push_back(a);
  return t;
}

}  // namespace

TEST_CASE("dispatcher honours the QDISC_KERNELS override") {
  const char* forced = std::getenv("QDISC_KERNELS");
  const auto& active = kernels::active();
  if (forced && std::string(forced) == "scalar") {
    CHECK(active.isa == kernels::Isa::Scalar);
  } else if (kernels::avx2_table() != nullptr) {
    CHECK(active.isa == kernels::Isa::Avx2);
  } else {
    CHECK(active.isa == kernels::Isa::Scalar);
  }
  MESSAGE("active kernels: " << active.name);
}

TEST_CASE("expm_squarings keeps the scaled norm under the threshold") {
  CHECK(kernels::expm_squarings(0.0) == 0);
  CHECK(kernels::expm_squarings(kernels::kExpmNormThreshold) == 0);
  for (double n : {0.3, 1.0, 7.5, 1e3}) {
    const int s = kernels::expm_squarings(n);
    CHECK(n / std::ldexp(1.0, s) <= kernels::kExpmNormThreshold);
    CHECK(n / std::ldexp(1.0, s - 1) > kernels::kExpmNormThreshold);
  }
}

TEST_CASE("expm agrees with the Eigen matrix exponential") {
  testing::Sampler s(11);
  for (const auto* k : tables()) {
    CAPTURE(k->name);
    for (int i = 0; i < 200; ++i) {
      const Mat4 gen = i % 2 ? random_generator(s) : random_matrix(s, 0.5);
      const double dt = s.uniform(0.01, 8.0);
      Mat4 u;
      k->expm(gen, dt, u);
      const Eigen::Matrix4d ref = (dt * to_eigen(gen)).exp();
      CHECK(max_diff(ref, u) <= 1e-12 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("expm of the zero generator is the identity") {
  for (const auto* k : tables()) {
    Mat4 u;
    k->expm(Mat4::zero(), 3.0, u);
    CHECK(max_diff(u, Mat4::identity()) == 0.0);
  }
}

TEST_CASE("expm_frechet matches the block-triangular exponential oracle") {
  testing::Sampler s(12);
  for (const auto* k : tables()) {
    CAPTURE(k->name);
    for (int i = 0; i < 200; ++i) {
      const Mat4 gen = i % 2 ? random_generator(s) : random_matrix(s, 0.5);
      const Mat4 dir = random_matrix(s, 1.0);
      const double dt = s.uniform(0.01, 5.0);
      Mat4 u, du;
      k->expm_frechet(gen, dir, dt, u, du);
      // exp([[A, E], [0, A]]) carries the Fréchet derivative in its upper-right block.
      Eigen::Matrix<double, 8, 8> big = Eigen::Matrix<double, 8, 8>::Zero();
      big.block<4, 4>(0, 0) = dt * to_eigen(gen);
      big.block<4, 4>(4, 4) = dt * to_eigen(gen);
      big.block<4, 4>(0, 4) = dt * to_eigen(dir);
      const Eigen::Matrix<double, 8, 8> e = big.exp();
      const Eigen::Matrix4d ref_u = e.block<4, 4>(0, 0);
      const Eigen::Matrix4d ref_du = e.block<4, 4>(0, 4);
      CHECK(max_diff(ref_u, u) <= 1e-12 * std::max(1.0, ref_u.cwiseAbs().maxCoeff()));
      CHECK(max_diff(ref_du, du) <= 1e-11 * std::max(1.0, ref_du.cwiseAbs().maxCoeff()));
      Mat4 plain;
      k->expm(gen, dt, plain);
      CHECK(max_diff(plain, u) == 0.0);
    }
  }
}

TEST_CASE("AVX2 kernels are equivalent to the scalar reference") {
  const auto* fast = kernels::avx2_table();
  if (fast == nullptr) {
    MESSAGE("AVX2 kernels unavailable on this machine; equivalence not exercised");
    return;
  }
  const auto& ref = kernels::scalar_table();
  testing::Sampler s(13);
  for (int i = 0; i < 1000; ++i) {
    const Mat4 a = random_matrix(s, 1.0);
    const Mat4 b = random_matrix(s, 1.0);
    const Vec4 x = random_vec(s);
    Mat4 m1, m2;
    ref.mul(a, b, m1);
    fast->mul(a, b, m2);
    CHECK(max_diff(m1, m2) <= 1e-14 * std::max(1.0, max_abs(m1)));
    Vec4 y1, y2;
    ref.apply(a, x, y1);
    fast->apply(a, x, y2);
    for (int r = 0; r < 4; ++r) CHECK(std::fabs(y1[r] - y2[r]) <= 1e-14 * (1.0 + std::fabs(y1[r])) * 8);
    ref.apply_transposed(a, x, y1);
    fast->apply_transposed(a, x, y2);
    for (int r = 0; r < 4; ++r) CHECK(std::fabs(y1[r] - y2[r]) <= 1e-14 * (1.0 + std::fabs(y1[r])) * 8);

    const Mat4 gen = random_generator(s);
    const double dt = s.uniform(0.01, 10.0);
    Mat4 u1, u2, d1, d2;
    ref.expm(gen, dt, u1);
    fast->expm(gen, dt, u2);
    CHECK(max_diff(u1, u2) <= 1e-13 * std::max(1.0, max_abs(u1)));
    ref.expm_frechet(gen, b, dt, u1, d1);
    fast->expm_frechet(gen, b, dt, u2, d2);
    CHECK(max_diff(u1, u2) <= 1e-13 * std::max(1.0, max_abs(u1)));
    CHECK(max_diff(d1, d2) <= 1e-12 * std::max(1.0, max_abs(d1)));
  }

  // Pair measures on lengths that exercise the 4-wide body and the tail.
  for (std::size_t n : {1u, 3u, 4u, 5u, 17u, 1000u}) {
    std::vector<Vec4> p(n), q(n);
    for (std::size_t j = 0; j < n; ++j) {
      p[j] = DensityMatrix::from_bloch(s.bloch()).pauli();
      q[j] = DensityMatrix::from_bloch(s.bloch()).pauli();
    }
    std::vector<kernels::PairMeasures> r1(n), r2(n);
    ref.pair_measures(p, q, r1);
    fast->pair_measures(p, q, r2);
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(r1[j].d_tr == doctest::Approx(r2[j].d_tr).epsilon(1e-14));
      CHECK(std::fabs(r1[j].d_hs - r2[j].d_hs) <= 1e-15);
      CHECK(std::fabs(r1[j].purity1 - r2[j].purity1) <= 1e-15);
      CHECK(std::fabs(r1[j].purity2 - r2[j].purity2) <= 1e-15);
    }
  }
}

TEST_CASE("pair_measures agree with the density-matrix distances") {
  testing::Sampler s(14);
  for (const auto* k : tables()) {
    CAPTURE(k->name);
    std::vector<DensityMatrix> a, b;
    std::vector<Vec4> p, q;
    for (int j = 0; j < 101; ++j) {
      a.push_back(s.state());
      b.push_back(s.state());
      p.push_back(a.back().pauli());
      q.push_back(b.back().pauli());
    }
    std::vector<kernels::PairMeasures> out(p.size());
    k->pair_measures(p, q, out);
    for (std::size_t j = 0; j < p.size(); ++j) {
      CHECK(std::fabs(out[j].d_tr - trace_distance(a[j], b[j])) <= 1e-12);
      CHECK(std::fabs(out[j].d_hs - hilbert_schmidt_distance(a[j], b[j])) <= 1e-12);
      CHECK(std::fabs(out[j].purity1 - purity(a[j])) <= 1e-12);
      CHECK(std::fabs(out[j].purity2 - purity(b[j])) <= 1e-12);
    }
  }
}

TEST_CASE("apply_transposed is the adjoint of apply under the Pauli inner product") {
  testing::Sampler s(15);
  for (const auto* k : tables()) {
    for (int i = 0; i < 100; ++i) {
      const Mat4 m = random_matrix(s, 1.0);
      const Vec4 x = random_vec(s);
      const Vec4 y = random_vec(s);
      Vec4 mx, mty;
      k->apply(m, x, mx);
      k->apply_transposed(m, y, mty);
      double lhs = 0.0, rhs = 0.0;
      for (int r = 0; r < 4; ++r) {
        lhs += y[r] * mx[r];
        rhs += mty[r] * x[r];
      }
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}
