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

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qdisc/protocols.hpp"
#include "random_states.hpp"

using namespace qdisc;

namespace {

DiscriminationProblem ramsey_problem(double delta_b, LindbladSpec noise, double t_final) {
  DiscriminationProblem p;
  p.field = 1.0;
  p.delta_b = delta_b;
  p.noise = noise;
  p.grid = default_grid(t_final, delta_b, noise.decay_time());
  return p;
}

MCurve analytic_curve(double gamma, double lo, double hi, std::size_t n) {
  MCurve c;
  c.gamma_label = gamma;
  for (std::size_t i = 0; i < n; ++i) {
    const double db = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    c.delta_b_values.push_back(db);
    c.m_values.push_back(m_analytic(db, gamma));
  }
  return c;
}

}  // namespace

TEST_CASE("speed-limit time") {
  CHECK(qsl_time(0.011) == doctest::Approx(285.60).epsilon(1e-4));
  CHECK(qsl_time(std::numbers::pi) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(qsl_time(0.0), std::invalid_argument);
  CHECK_THROWS_AS(qsl_time(-1.0), std::invalid_argument);
}

TEST_CASE("closed-form Ramsey curves agree with propagation") {
  for (const LindbladSpec noise : {LindbladSpec::relaxation(1000.0), LindbladSpec::dephasing(1000.0),
                                   LindbladSpec::none()}) {
    const auto p = ramsey_problem(0.011, noise, 3000.0);
    const RamseyResult r = ramsey_analytic(p);
    CHECK(r.notice.empty());
    const auto zero = ControlSet::zeros(p.grid.n_steps());
    const auto m = measure_pair(propagate_forward(p, Hypothesis::Lower, zero),
                                propagate_forward(p, Hypothesis::Upper, zero));
    REQUIRE(m.size() == r.d_tr.size());
    double worst = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
      worst = std::max({worst, std::fabs(m[j].d_tr - r.d_tr[j]), std::fabs(m[j].d_hs - r.d_hs[j]),
                        std::fabs(m[j].purity1 - r.purity_1[j]), std::fabs(m[j].purity2 - r.purity_2[j])});
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("Ramsey dephasing purity tends to one half") {
  const auto p = ramsey_problem(0.011, LindbladSpec::dephasing(100.0), 5000.0);
  const RamseyResult r = ramsey_analytic(p);
  CHECK(r.purity_1.back() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.purity_1.front() == doctest::Approx(1.0));
}

TEST_CASE("non-|+> initial states fall back to propagation") {
  auto p = ramsey_problem(0.05, LindbladSpec::relaxation(50.0), 100.0);
  p.initial = DensityMatrix::from_bloch({0.6, 0.0, 0.3});
  const RamseyResult r = ramsey_analytic(p);
  CHECK_FALSE(r.notice.empty());
  const auto zero = ControlSet::zeros(p.grid.n_steps());
  const auto m = measure_pair(propagate_forward(p, Hypothesis::Lower, zero),
                              propagate_forward(p, Hypothesis::Upper, zero));
  CHECK(r.d_tr.back() == m.back().d_tr);
}

TEST_CASE("closed-form M values and limits") {
  CHECK(m_analytic(0.01, 0.0) == 0.0);
  CHECK(m_analytic(0.02, 0.02) == doctest::Approx(1.0 - std::sqrt(0.5 * std::exp(-std::numbers::pi / 2))).epsilon(1e-14));
  CHECK(m_analytic(0.02, 0.02) == doctest::Approx(0.67760).epsilon(1e-5));
  CHECK(m_analytic(1e3, 1.0) < 0.01);
  CHECK(m_analytic(1e-3, 1.0) > 0.99);
  double prev = 1.0;
  for (double db = 1e-4; db < 1.0; db *= 1.7) {
    const double m = m_analytic(db, 1e-3);
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
    CHECK(m < prev);
    prev = m;
  }
  CHECK_THROWS_AS(m_analytic(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(m_analytic(1.0, -1.0), std::invalid_argument);
  CHECK(m_curve_rate(NoiseKind::Relaxation, 1000.0) == doctest::Approx(1e-3));
  CHECK(m_curve_rate(NoiseKind::Dephasing, 1000.0) == doctest::Approx(4e-3));
  CHECK_THROWS_AS(m_curve_rate(NoiseKind::None, 1000.0), std::invalid_argument);
}

TEST_CASE("numerical M on Ramsey trajectories") {
  const auto p0 = ramsey_problem(0.011, LindbladSpec::none(), 400.0);
  const auto zero0 = ControlSet::zeros(p0.grid.n_steps());
  const auto a0 = propagate_forward(p0, Hypothesis::Lower, zero0);
  CHECK(m_numeric(a0, a0) == 1.0);
  CHECK(m_numeric(a0, propagate_forward(p0, Hypothesis::Upper, zero0)) < 1e-6);

  const double t1 = 1000.0, db = 0.011;
  const auto p = ramsey_problem(db, LindbladSpec::relaxation(t1), 1000.0);
  const auto zero = ControlSet::zeros(p.grid.n_steps());
  const MinimumPoint mp = m_numeric_point(propagate_forward(p, Hypothesis::Lower, zero),
                                          propagate_forward(p, Hypothesis::Upper, zero));
  CHECK(mp.m == doctest::Approx(m_analytic(db, 1.0 / t1)).epsilon(1e-5));
  CHECK(mp.index > 0);
}

TEST_CASE("quantum Fisher information of free precession") {
  // Identical states: the Bures square root leaves a rounding residue.
  CHECK(qfi(DensityMatrix::plus(), DensityMatrix::plus(), 0.1) < 1e-10);
  CHECK(qfi_splitting(1000.0) == doctest::Approx(1e-6));
  // Noise-free precession of |+> has F_Q = t².
  for (double t : {10.0, 100.0, 1000.0}) {
    auto p = ramsey_problem(0.011, LindbladSpec::none(), t);
    const double f = qfi_for_fields(p, ControlSet::zeros(p.grid.n_steps()));
    CHECK(f == doctest::Approx(t * t).epsilon(1e-2));
  }
  // Relaxation: F_Q = t²·e^{−γt} for the transverse Bloch component alone.
  const double t1 = 1000.0, t = 800.0;
  auto p = ramsey_problem(0.011, LindbladSpec::relaxation(t1), t);
  const double f = qfi_for_fields(p, ControlSet::zeros(p.grid.n_steps()));
  CHECK(f == doctest::Approx(t * t * std::exp(-t / t1)).epsilon(1e-2));
  CHECK_THROWS_AS(qfi(DensityMatrix::plus(), DensityMatrix::plus(), 0.0), std::invalid_argument);
}

TEST_CASE("effective-time fit recovers its generating rate") {
  for (double gamma : {1e-3, 4e-3, 2.5e-2}) {
    const MCurve c = analytic_curve(gamma, 1e-3, 1e-2, 7);
    const EffectiveTimeFit fit = fit_effective_time(c, NoiseKind::Relaxation);
    CHECK(fit.gamma_eff == doctest::Approx(gamma).epsilon(1e-6));
    CHECK(fit.ratio == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.residual < 1e-9);
  }
}

TEST_CASE("effective-time fit is scale covariant") {
  // M depends on δB/γ only, so scaling both axes scales the fitted rate.
  MCurve c = analytic_curve(2e-3, 1e-3, 1e-2, 8);
  for (std::size_t i = 0; i < c.m_values.size(); ++i) c.m_values[i] = std::min(1.0, c.m_values[i] * 1.1);
  const EffectiveTimeFit base = fit_effective_time(c, NoiseKind::Dephasing);
  for (double& d : c.delta_b_values) d *= 7.0;
  const EffectiveTimeFit scaled = fit_effective_time(c, NoiseKind::Dephasing);
  CHECK(scaled.gamma_eff == doctest::Approx(7.0 * base.gamma_eff).epsilon(1e-8));
  CHECK(scaled.residual == doctest::Approx(base.residual).epsilon(1e-8));
}

TEST_CASE("effective-time fit rejects unusable curves") {
  MCurve c = analytic_curve(1e-3, 1e-3, 1e-2, 7);
  CHECK_THROWS_AS(fit_effective_time(c, NoiseKind::None), std::invalid_argument);
  MCurve short_curve = analytic_curve(1e-3, 1e-3, 1e-2, 4);
  CHECK_THROWS_AS(fit_effective_time(short_curve, NoiseKind::Relaxation), std::invalid_argument);
  MCurve narrow = analytic_curve(1e-3, 1e-3, 5e-3, 7);
  CHECK_THROWS_AS(fit_effective_time(narrow, NoiseKind::Relaxation), std::invalid_argument);
  MCurve bad = c;
  bad.m_values[2] = 1.5;
  CHECK_THROWS_AS(fit_effective_time(bad, NoiseKind::Relaxation), std::invalid_argument);
  // All-zero M is best explained by γ → 0, which pins the scan at its lower edge.
  MCurve perfect = c;
  for (double& m : perfect.m_values) m = 0.0;
  CHECK_THROWS_AS(fit_effective_time(perfect, NoiseKind::Relaxation), NumericalError);
}

TEST_CASE("final-time families") {
  const auto f = final_time_family(0.011, 1000.0, 6);
  REQUIRE(f.size() == 6);
  CHECK(f.front() == doctest::Approx(0.5 * qsl_time(0.011)));
  CHECK(f.back() == doctest::Approx(16.0 * qsl_time(0.011)));
  for (std::size_t i = 2; i < f.size(); ++i) {
    CHECK(f[i] / f[i - 1] == doctest::Approx(f[1] / f[0]).epsilon(1e-12));
  }
  const auto capped = final_time_family(0.001, 1000.0, 6);
  CHECK(capped.back() == doctest::Approx(10000.0));
  CHECK(final_time_family(0.011, 0.0, 1).size() == 1);
  CHECK_THROWS_AS(final_time_family(0.011, 1000.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(final_time_family(0.011, 1000.0, 3, 2.0, 1.0), std::invalid_argument);
}
