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

#include <algorithm>
#include <cmath>

#include "qdisc/kernels/kernels.hpp"

namespace qdisc::kernels {

int expm_squarings(double norm) {
  if (!(norm > kExpmNormThreshold)) {
    return 0;
  }
  return static_cast<int>(std::ceil(std::log2(norm / kExpmNormThreshold)));
}

namespace {

double row_sum_norm(const Mat4& m) {
  double best = 0.0;
  for (int r = 0; r < 4; ++r) {
    double s = 0.0;
    for (int c = 0; c < 4; ++c) s += std::fabs(m(r, c));
    best = std::max(best, s);
  }
  return best;
}

void mul_scalar(const Mat4& lhs, const Mat4& rhs, Mat4& out) {
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += lhs(r, k) * rhs(k, c);
      out(r, c) = s;
    }
  }
}

void apply_scalar(const Mat4& m, const Vec4& x, Vec4& out) {
  Vec4 tmp;
  for (int r = 0; r < 4; ++r) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += m(r, k) * x[k];
    tmp[r] = s;
  }
  out = tmp;
}

void apply_transposed_scalar(const Mat4& m, const Vec4& x, Vec4& out) {
  Vec4 tmp;
  for (int c = 0; c < 4; ++c) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += m(k, c) * x[k];
    tmp[c] = s;
  }
  out = tmp;
}

// P ← 1 + X·P/k, Horner step of the truncated Taylor series.
void horner_step(const Mat4& x, double inv_k, Mat4& p) {
  Mat4 t;
  mul_scalar(x, p, t);
  for (int i = 0; i < 16; ++i) p.a[i] = t.a[i] * inv_k;
  p.a[0] += 1.0;
  p.a[5] += 1.0;
  p.a[10] += 1.0;
  p.a[15] += 1.0;
}

void expm_scalar(const Mat4& gen, double dt, Mat4& out) {
  Mat4 x;
  for (int i = 0; i < 16; ++i) x.a[i] = gen.a[i] * dt;
  const int squarings = expm_squarings(row_sum_norm(x));
  const double scale = std::ldexp(1.0, -squarings);
  for (int i = 0; i < 16; ++i) x.a[i] *= scale;

  Mat4 p = Mat4::identity();
  for (int k = kExpmTaylorOrder; k >= 1; --k) {
    horner_step(x, 1.0 / k, p);
  }
  for (int s = 0; s < squarings; ++s) {
    Mat4 t;
    mul_scalar(p, p, t);
    p = t;
  }
  out = p;
}

void expm_frechet_scalar(const Mat4& gen, const Mat4& dir, double dt, Mat4& exp_out,
                         Mat4& deriv_out) {
  Mat4 x;
  Mat4 y;
  for (int i = 0; i < 16; ++i) {
    x.a[i] = gen.a[i] * dt;
    y.a[i] = dir.a[i] * dt;
  }
  const int squarings = expm_squarings(row_sum_norm(x));
  const double scale = std::ldexp(1.0, -squarings);
  for (int i = 0; i < 16; ++i) {
    x.a[i] *= scale;
    y.a[i] *= scale;
  }

  // Block-triangular Horner: (P, Q) ← (1 + X·P/k, (X·Q + Y·P)/k).
  Mat4 p = Mat4::identity();
  Mat4 q = Mat4::zero();
  for (int k = kExpmTaylorOrder; k >= 1; --k) {
    const double inv_k = 1.0 / k;
    Mat4 xq;
    Mat4 yp;
    mul_scalar(x, q, xq);
    mul_scalar(y, p, yp);
    for (int i = 0; i < 16; ++i) q.a[i] = (xq.a[i] + yp.a[i]) * inv_k;
    horner_step(x, inv_k, p);
  }
  for (int s = 0; s < squarings; ++s) {
    Mat4 pp;
    Mat4 pq;
    Mat4 qp;
    mul_scalar(p, p, pp);
    mul_scalar(p, q, pq);
    mul_scalar(q, p, qp);
    for (int i = 0; i < 16; ++i) q.a[i] = pq.a[i] + qp.a[i];
    p = pp;
  }
  exp_out = p;
  deriv_out = q;
}

void pair_measures_scalar(std::span<const Vec4> first, std::span<const Vec4> second,
                          std::span<PairMeasures> out) {
  const std::size_t n = std::min({first.size(), second.size(), out.size()});
  for (std::size_t i = 0; i < n; ++i) {
    const Vec4& a = first[i];
    const Vec4& b = second[i];
    const double d0 = a[0] - b[0];
    double r2 = 0.0;
    for (int k = 1; k < 4; ++k) {
      const double d = a[k] - b[k];
      r2 += d * d;
    }
    const double pa = a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3];
    const double pb = b[0] * b[0] + b[1] * b[1] + b[2] * b[2] + b[3] * b[3];
    // Δ has eigenvalues ½(Δ0 ± ‖Δr‖), so ½‖Δ‖_tr = ½·max(|Δ0|, ‖Δr‖).
    out[i].d_tr = 0.5 * std::max(std::fabs(d0), std::sqrt(r2));
    out[i].d_hs = 0.25 * (d0 * d0 + r2);
    out[i].purity1 = 0.5 * pa;
    out[i].purity2 = 0.5 * pb;
  }
}

constexpr KernelTable kScalarTable{
    Isa::Scalar,       "scalar",           &mul_scalar,         &apply_scalar,
    &apply_transposed_scalar, &expm_scalar, &expm_frechet_scalar, &pair_measures_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalarTable; }

}  // namespace qdisc::kernels
