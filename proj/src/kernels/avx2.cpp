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

// Compiled with -mavx2 -mfma. Nothing here may run before dispatch has
// confirmed CPU support.

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#include "qdisc/kernels/kernels.hpp"

namespace qdisc::kernels {
namespace {

inline __m256d row(const Mat4& m, int r) { return _mm256_load_pd(m.a + 4 * r); }

void mul_avx2(const Mat4& lhs, const Mat4& rhs, Mat4& out) {
  const __m256d r0 = row(rhs, 0);
  const __m256d r1 = row(rhs, 1);
  const __m256d r2 = row(rhs, 2);
  const __m256d r3 = row(rhs, 3);
  for (int r = 0; r < 4; ++r) {
    const double* l = lhs.a + 4 * r;
    __m256d acc = _mm256_mul_pd(_mm256_set1_pd(l[0]), r0);
    acc = _mm256_fmadd_pd(_mm256_set1_pd(l[1]), r1, acc);
    acc = _mm256_fmadd_pd(_mm256_set1_pd(l[2]), r2, acc);
    acc = _mm256_fmadd_pd(_mm256_set1_pd(l[3]), r3, acc);
    _mm256_store_pd(out.a + 4 * r, acc);
  }
}

void apply_avx2(const Mat4& m, const Vec4& x, Vec4& out) {
  const __m256d xv = _mm256_load_pd(x.v);
  const __m256d t0 = _mm256_mul_pd(row(m, 0), xv);
  const __m256d t1 = _mm256_mul_pd(row(m, 1), xv);
  const __m256d t2 = _mm256_mul_pd(row(m, 2), xv);
  const __m256d t3 = _mm256_mul_pd(row(m, 3), xv);
  const __m256d h01 = _mm256_hadd_pd(t0, t1);
  const __m256d h23 = _mm256_hadd_pd(t2, t3);
  const __m256d lo = _mm256_permute2f128_pd(h01, h23, 0x20);
  const __m256d hi = _mm256_permute2f128_pd(h01, h23, 0x31);
  _mm256_store_pd(out.v, _mm256_add_pd(lo, hi));
}

void apply_transposed_avx2(const Mat4& m, const Vec4& x, Vec4& out) {
  __m256d acc = _mm256_mul_pd(_mm256_set1_pd(x[0]), row(m, 0));
  acc = _mm256_fmadd_pd(_mm256_set1_pd(x[1]), row(m, 1), acc);
  acc = _mm256_fmadd_pd(_mm256_set1_pd(x[2]), row(m, 2), acc);
  acc = _mm256_fmadd_pd(_mm256_set1_pd(x[3]), row(m, 3), acc);
  _mm256_store_pd(out.v, acc);
}

double row_sum_norm(const Mat4& m) {
  double best = 0.0;
  for (int r = 0; r < 4; ++r) {
    double s = 0.0;
    for (int c = 0; c < 4; ++c) s += std::fabs(m(r, c));
    best = std::max(best, s);
  }
  return best;
}

void scale_into(const Mat4& m, double factor, Mat4& out) {
  const __m256d f = _mm256_set1_pd(factor);
  for (int r = 0; r < 4; ++r) {
    _mm256_store_pd(out.a + 4 * r, _mm256_mul_pd(row(m, r), f));
  }
}

// P ← 1 + X·P/k
void horner_step(const Mat4& x, double inv_k, Mat4& p) {
  Mat4 t;
  mul_avx2(x, p, t);
  const __m256d f = _mm256_set1_pd(inv_k);
  for (int r = 0; r < 4; ++r) {
    _mm256_store_pd(p.a + 4 * r, _mm256_mul_pd(row(t, r), f));
  }
  p.a[0] += 1.0;
  p.a[5] += 1.0;
  p.a[10] += 1.0;
  p.a[15] += 1.0;
}

void expm_avx2(const Mat4& gen, double dt, Mat4& out) {
  Mat4 x;
  scale_into(gen, dt, x);
  const int squarings = expm_squarings(row_sum_norm(x));
  scale_into(x, std::ldexp(1.0, -squarings), x);

  Mat4 p = Mat4::identity();
  for (int k = kExpmTaylorOrder; k >= 1; --k) {
    horner_step(x, 1.0 / k, p);
  }
  for (int s = 0; s < squarings; ++s) {
    Mat4 t;
    mul_avx2(p, p, t);
    p = t;
  }
  out = p;
}

void expm_frechet_avx2(const Mat4& gen, const Mat4& dir, double dt, Mat4& exp_out,
                       Mat4& deriv_out) {
  Mat4 x;
  Mat4 y;
  scale_into(gen, dt, x);
  scale_into(dir, dt, y);
  const int squarings = expm_squarings(row_sum_norm(x));
  const double scale = std::ldexp(1.0, -squarings);
  scale_into(x, scale, x);
  scale_into(y, scale, y);

  Mat4 p = Mat4::identity();
  Mat4 q = Mat4::zero();
  for (int k = kExpmTaylorOrder; k >= 1; --k) {
    const __m256d f = _mm256_set1_pd(1.0 / k);
    Mat4 xq;
    Mat4 yp;
    mul_avx2(x, q, xq);
    mul_avx2(y, p, yp);
    for (int r = 0; r < 4; ++r) {
      _mm256_store_pd(q.a + 4 * r, _mm256_mul_pd(_mm256_add_pd(row(xq, r), row(yp, r)), f));
    }
    horner_step(x, 1.0 / k, p);
  }
  for (int s = 0; s < squarings; ++s) {
    Mat4 pp;
    Mat4 pq;
    Mat4 qp;
    mul_avx2(p, p, pp);
    mul_avx2(p, q, pq);
    mul_avx2(q, p, qp);
    for (int r = 0; r < 4; ++r) {
      _mm256_store_pd(q.a + 4 * r, _mm256_add_pd(row(pq, r), row(qp, r)));
    }
    p = pp;
  }
  exp_out = p;
  deriv_out = q;
}

// In-register transpose of four coordinate vectors into four component lanes.
inline void transpose4(__m256d& a, __m256d& b, __m256d& c, __m256d& d) {
  const __m256d t0 = _mm256_unpacklo_pd(a, b);
  const __m256d t1 = _mm256_unpackhi_pd(a, b);
  const __m256d t2 = _mm256_unpacklo_pd(c, d);
  const __m256d t3 = _mm256_unpackhi_pd(c, d);
  a = _mm256_permute2f128_pd(t0, t2, 0x20);
  b = _mm256_permute2f128_pd(t1, t3, 0x20);
  c = _mm256_permute2f128_pd(t0, t2, 0x31);
  d = _mm256_permute2f128_pd(t1, t3, 0x31);
}

void pair_measures_avx2(std::span<const Vec4> first, std::span<const Vec4> second,
                        std::span<PairMeasures> out) {
  const std::size_t n = std::min({first.size(), second.size(), out.size()});
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d quarter = _mm256_set1_pd(0.25);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d a0 = _mm256_load_pd(first[i].v);
    __m256d a1 = _mm256_load_pd(first[i + 1].v);
    __m256d a2 = _mm256_load_pd(first[i + 2].v);
    __m256d a3 = _mm256_load_pd(first[i + 3].v);
    __m256d b0 = _mm256_load_pd(second[i].v);
    __m256d b1 = _mm256_load_pd(second[i + 1].v);
    __m256d b2 = _mm256_load_pd(second[i + 2].v);
    __m256d b3 = _mm256_load_pd(second[i + 3].v);
    transpose4(a0, a1, a2, a3);  // aK now holds component K of four states
    transpose4(b0, b1, b2, b3);

    const __m256d d0 = _mm256_sub_pd(a0, b0);
    const __m256d d1 = _mm256_sub_pd(a1, b1);
    const __m256d d2 = _mm256_sub_pd(a2, b2);
    const __m256d d3 = _mm256_sub_pd(a3, b3);
    __m256d r2 = _mm256_mul_pd(d1, d1);
    r2 = _mm256_fmadd_pd(d2, d2, r2);
    r2 = _mm256_fmadd_pd(d3, d3, r2);
    const __m256d abs_d0 = _mm256_andnot_pd(sign_mask, d0);
    const __m256d d_tr = _mm256_mul_pd(half, _mm256_max_pd(abs_d0, _mm256_sqrt_pd(r2)));
    const __m256d d_hs = _mm256_mul_pd(quarter, _mm256_fmadd_pd(d0, d0, r2));

    __m256d pa = _mm256_mul_pd(a0, a0);
    pa = _mm256_fmadd_pd(a1, a1, pa);
    pa = _mm256_fmadd_pd(a2, a2, pa);
    pa = _mm256_fmadd_pd(a3, a3, pa);
    __m256d pb = _mm256_mul_pd(b0, b0);
    pb = _mm256_fmadd_pd(b1, b1, pb);
    pb = _mm256_fmadd_pd(b2, b2, pb);
    pb = _mm256_fmadd_pd(b3, b3, pb);
    pa = _mm256_mul_pd(half, pa);
    pb = _mm256_mul_pd(half, pb);

    // PairMeasures is four doubles; transposing back gives one record per lane.
    __m256d o0 = d_tr;
    __m256d o1 = d_hs;
    __m256d o2 = pa;
    __m256d o3 = pb;
    transpose4(o0, o1, o2, o3);
    _mm256_storeu_pd(&out[i].d_tr, o0);
    _mm256_storeu_pd(&out[i + 1].d_tr, o1);
    _mm256_storeu_pd(&out[i + 2].d_tr, o2);
    _mm256_storeu_pd(&out[i + 3].d_tr, o3);
  }
  if (i < n) {
    scalar_table().pair_measures(first.subspan(i, n - i), second.subspan(i, n - i),
                                 out.subspan(i, n - i));
  }
}

constexpr KernelTable kAvx2Table{
    Isa::Avx2,      "avx2",          &mul_avx2,          &apply_avx2,
    &apply_transposed_avx2, &expm_avx2, &expm_frechet_avx2, &pair_measures_avx2,
};

}  // namespace

const KernelTable& avx2_table_unchecked() { return kAvx2Table; }

}  // namespace qdisc::kernels
