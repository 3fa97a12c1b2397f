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
#include <string>

#include "qdisc/dynamics.hpp"
#include "random_states.hpp"

using namespace qdisc;

namespace {

DiscriminationProblem make_problem(double delta_b, LindbladSpec noise, double t_final,
                                   std::size_t n) {
  DiscriminationProblem p;
  p.field = 1.0;
  p.delta_b = delta_b;
  p.noise = noise;
  p.grid = TimeGrid(t_final, n);
  return p;
}

LindbladSpec random_noise(testing::Sampler& s) {
  switch (s.index(3)) {
    case 0:
      return LindbladSpec::none();
    case 1:
      return LindbladSpec::relaxation(s.uniform(0.5, 100.0));
    default:
      return LindbladSpec::dephasing(s.uniform(0.5, 100.0));
  }
}

ComplexMatrix2 random_hermitian(testing::Sampler& s) {
  const double a = s.normal(), d = s.normal();
  const cplx off(s.normal(), s.normal());
  return {a, off, std::conj(off), d};
}

}  // namespace

TEST_CASE("noise parameters") {
  CHECK(LindbladSpec::relaxation(1000.0).rate == doctest::Approx(1e-3));
  CHECK(LindbladSpec::dephasing(250.0).decay_time() == doctest::Approx(250.0));
  CHECK(LindbladSpec::none().decay_time() == 0.0);
  CHECK_THROWS_AS(LindbladSpec::relaxation(0.0), std::invalid_argument);
  CHECK_THROWS_AS(LindbladSpec::dephasing(-1.0), std::invalid_argument);
  CHECK(LindbladSpec::relaxation(1.0).op() == ComplexMatrix2(0.0, 1.0, 0.0, 0.0));
  CHECK(std::string(noise_name(NoiseKind::Dephasing)) == "dephasing");
}

TEST_CASE("problem validation and drifts") {
  auto p = make_problem(0.2, LindbladSpec::none(), 1.0, 4);
  CHECK(p.drift_field(Hypothesis::Lower) == doctest::Approx(0.9));
  CHECK(p.drift_field(Hypothesis::Upper) == doctest::Approx(1.1));
  CHECK(p.drift(Hypothesis::Upper)(0, 0).real() == doctest::Approx(0.55));
  CHECK_NOTHROW(p.validate());
  p.delta_b = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.delta_b = 0.1;
  p.noise.rate = 0.5;  // rate without a kind
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(0.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
}

TEST_CASE("default grid resolution rules") {
  // 10 points per unit time dominate.
  CHECK(default_grid(100.0, 0.011, 1000.0).n_steps() == 1000);
  // The decay rule dominates for a short decay time.
  CHECK(default_grid(100.0, 0.011, 5.0).n_steps() == 2000);
  // The period rule dominates for a large splitting.
  CHECK(default_grid(10.0, 100.0, 0.0).n_steps() ==
        static_cast<std::size_t>(std::ceil(50.0 * 10.0 * 100.0 / (2.0 * std::numbers::pi))));
}

TEST_CASE("Liouvillian examples") {
  const double b = 1.3;
  const ComplexMatrix2 drift = ComplexMatrix2::sigma_z() * cplx(0.5 * b);
  const std::array<double, 3> off{0.0, 0.0, 0.0};
  const Vec4 r = liouvillian_apply(drift, off, LindbladSpec::none(), DensityMatrix::plus().matrix()).to_pauli();
  CHECK(std::fabs(r[0]) < 1e-15);
  CHECK(std::fabs(r[1]) < 1e-15);
  CHECK(r[2] == doctest::Approx(b).epsilon(1e-15));
  CHECK(std::fabs(r[3]) < 1e-15);

  const double gamma = 0.37;
  const auto relax = LindbladSpec::relaxation(1.0 / gamma);
  const ComplexMatrix2 d1 =
      liouvillian_apply(ComplexMatrix2::zero(), off, relax, DensityMatrix::excited().matrix());
  CHECK(d1(1, 1).real() == doctest::Approx(-gamma).epsilon(1e-14));
  CHECK(d1(0, 0).real() == doctest::Approx(gamma).epsilon(1e-14));

  const auto deph = LindbladSpec::dephasing(1.0 / gamma);
  const auto plus = DensityMatrix::plus().matrix();
  const ComplexMatrix2 d2 = liouvillian_apply(ComplexMatrix2::zero(), off, deph, plus);
  CHECK(d2(0, 1).real() == doctest::Approx(-2.0 * gamma * plus(0, 1).real()).epsilon(1e-14));
  CHECK(std::fabs(d2(0, 0)) < 1e-15);

  CHECK_THROWS_AS(liouvillian_apply(drift, {NAN, 0.0, 0.0}, relax, plus), NumericalError);
}

TEST_CASE("4x4 generator reproduces the matrix Liouvillian") {
  testing::Sampler s(31);
  for (int i = 0; i < 500; ++i) {
    const ComplexMatrix2 drift = ComplexMatrix2::sigma_z() * cplx(0.5 * s.uniform(-3, 3));
    const std::array<double, 3> e{s.normal(), s.normal(), s.normal()};
    const LindbladSpec noise = random_noise(s);
    const ComplexMatrix2 x = random_hermitian(s);
    const Vec4 expected = liouvillian_apply(drift, e, noise, x).to_pauli();
    const Mat4 gen = liouvillian_generator(drift, e, noise);
    Vec4 got;
    kernels::scalar_table().apply(gen, x.to_pauli(), got);
    for (int k = 0; k < 4; ++k) CHECK(got[k] == doctest::Approx(expected[k]).epsilon(1e-13).scale(1.0));
  }
  // ∂L/∂E_k equals the difference quotient of the generator, which is exact for a linear map.
  const LindbladSpec noise = LindbladSpec::relaxation(3.0);
  const ComplexMatrix2 drift = ComplexMatrix2::sigma_z() * cplx(0.5);
  for (Control k : kAllControls) {
    std::array<double, 3> e{0.1, -0.2, 0.3};
    const Mat4 g0 = liouvillian_generator(drift, e, noise);
    e[static_cast<int>(k)] += 1.0;
    const Mat4 g1 = liouvillian_generator(drift, e, noise);
    const Mat4 d = control_generator(k);
    for (int j = 0; j < 16; ++j) CHECK(g1.a[j] - g0.a[j] == doctest::Approx(d.a[j]).epsilon(1e-14).scale(1.0));
  }
}

TEST_CASE("forward propagation stays a density matrix on 1000 random problems") {
  testing::Sampler s(32);
  double worst_trace = 0.0;
  double worst_eig = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 10 + s.index(30);
    auto p = make_problem(s.uniform(0.001, 0.5), random_noise(s), s.uniform(1.0, 200.0), n);
    p.initial = s.state();
    ControlSet f{{s.field(n, 0.5), s.field(n, 0.5), s.field(n, 0.5)}};
    const Trajectory tr = propagate_forward(p, s.index(2) ? Hypothesis::Upper : Hypothesis::Lower, f);
    REQUIRE(tr.size() == n + 1);
    for (std::size_t j = 0; j < tr.size(); ++j) {
      const Vec4& c = tr.pauli(j);
      const double r = std::sqrt(c[1] * c[1] + c[2] * c[2] + c[3] * c[3]);
      worst_trace = std::max(worst_trace, std::fabs(c[0] - 1.0));
      worst_eig = std::max(worst_eig, -(0.5 * (c[0] - r)));
      // from_pauli re-validates Hermiticity, trace and positivity at the propagation tolerance.
      CHECK_NOTHROW(tr.state(j));
    }
  }
  CHECK(worst_trace <= 1e-10);
  CHECK(worst_eig <= 1e-10);
  MESSAGE("max trace defect " << worst_trace << ", most negative eigenvalue " << -worst_eig);
}

TEST_CASE("co-state pairing is invariant along the trajectory") {
  testing::Sampler s(33);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 50;
    const LindbladSpec noise = i % 2 ? LindbladSpec::relaxation(s.uniform(1.0, 1000.0)) : random_noise(s);
    auto p = make_problem(s.uniform(0.01, 0.5), noise, s.uniform(1.0, 500.0), n);
    p.initial = s.state();
    ControlSet f{{s.field(n, 0.3), s.field(n, 0.3), s.field(n, 0.3)}};
    const auto props = step_propagators(p, Hypothesis::Lower, f);
    const Trajectory rho = propagate_forward(p.initial, props);
    const Vec4 terminal = random_hermitian(s).to_pauli();
    const Trajectory chi = propagate_backward(props, terminal);
    const double ref = pauli_inner(chi.pauli(n), rho.pauli(n));
    for (std::size_t j = 0; j <= n; ++j) {
      worst = std::max(worst, std::fabs(pauli_inner(chi.pauli(j), rho.pauli(j)) - ref));
    }
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("unitary backward propagation inverts forward propagation") {
  testing::Sampler s(34);
  const std::size_t n = 200;
  auto p = make_problem(0.05, LindbladSpec::none(), 50.0, n);
  ControlSet f{{s.field(n, 0.5), s.field(n, 0.5), s.field(n, 0.5)}};
  const ComplexMatrix2 terminal = random_hermitian(s);
  const Trajectory chi = propagate_backward(p, Hypothesis::Upper, f, CoState::from_matrix(terminal));
  const auto props = step_propagators(p, Hypothesis::Upper, f);
  Vec4 x = chi.pauli(0);
  for (const auto& u : props) {
    Vec4 y;
    kernels::active().apply(u, x, y);
    x = y;
  }
  const Vec4 t = terminal.to_pauli();
  for (int k = 0; k < 4; ++k) CHECK(std::fabs(x[k] - t[k]) <= 1e-10);
}

TEST_CASE("free evolution reaches perfect distinguishability at pi/dB") {
  for (double db : {0.005, 0.011, 0.3}) {
    const double t = std::numbers::pi / db;
    const auto p = make_problem(db, LindbladSpec::none(), t, default_grid(t, db, 0.0).n_steps());
    const auto zero = ControlSet::zeros(p.grid.n_steps());
    const Trajectory a = propagate_forward(p, Hypothesis::Lower, zero);
    const Trajectory b = propagate_forward(p, Hypothesis::Upper, zero);
    CHECK(trace_distance(a.state(a.size() - 1), b.state(b.size() - 1)) ==
          doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("excited population decays exponentially") {
  const double t1 = 1000.0;
  auto p = make_problem(0.011, LindbladSpec::relaxation(t1), 3000.0, 3000);
  p.initial = DensityMatrix::excited();
  const Trajectory tr = propagate_forward(p, Hypothesis::Lower, ControlSet::zeros(3000));
  double worst = 0.0;
  for (std::size_t j = 0; j < tr.size(); ++j) {
    const double rho11 = 0.5 * (tr.pauli(j)[0] - tr.pauli(j)[3]);
    worst = std::max(worst, std::fabs(rho11 - std::exp(-p.grid.time(j) / t1)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("Ramsey relaxation matches the closed form") {
  const double t1 = 1000.0, db = 0.011;
  auto p = make_problem(db, LindbladSpec::relaxation(t1), 2511.0, 25110);
  const auto zero = ControlSet::zeros(p.grid.n_steps());
  const auto m = measure_pair(propagate_forward(p, Hypothesis::Lower, zero),
                              propagate_forward(p, Hypothesis::Upper, zero));
  double worst = 0.0;
  for (std::size_t j = 0; j < m.size(); ++j) {
    const double t = p.grid.time(j);
    worst = std::max(worst, std::fabs(m[j].d_tr - std::exp(-t / (2 * t1)) * std::fabs(std::sin(db * t / 2))));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("halving the step converges at second order for smooth fields") {
  const double t_final = 40.0;
  auto final_state = [&](std::size_t n) {
    auto p = make_problem(0.1, LindbladSpec::relaxation(30.0), t_final, n);
    ControlSet f = ControlSet::zeros(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double t = p.grid.midpoint(j);
      f.fields[0][j] = 0.3 * std::sin(0.2 * t);
      f.fields[1][j] = 0.2 * std::cos(0.13 * t);
    }
    return propagate_forward(p, Hypothesis::Lower, f).back();
  };
  const Vec4 reference = final_state(12800);
  auto error = [&](std::size_t n) {
    const Vec4 v = final_state(n);
    double e = 0.0;
    for (int k = 0; k < 4; ++k) e = std::max(e, std::fabs(v[k] - reference[k]));
    return e;
  };
  const double e1 = error(100), e2 = error(200), e3 = error(400);
  CHECK(e1 / e2 > 3.5);
  CHECK(e2 / e3 > 3.5);
}

TEST_CASE("noise-free dynamics preserves purity") {
  testing::Sampler s(35);
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 300;
    auto p = make_problem(s.uniform(0.01, 1.0), LindbladSpec::none(), s.uniform(10.0, 1000.0), n);
    p.initial = s.state();
    ControlSet f{{s.field(n, 1.0), s.field(n, 1.0), s.field(n, 1.0)}};
    const Trajectory tr = propagate_forward(p, Hypothesis::Lower, f);
    const double p0 = purity(p.initial);
    for (std::size_t j = 0; j < tr.size(); j += 10) CHECK(std::fabs(purity(tr.state(j)) - p0) <= 1e-10);
  }
}

TEST_CASE("non-finite propagation reports the failing step") {
  std::vector<Mat4> props(6, Mat4::identity());
  props[3].a[0] = NAN;
  try {
    propagate_forward(DensityMatrix::plus(), props);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("step 3") != std::string::npos);
  }
  try {
    propagate_backward(props, DensityMatrix::plus().pauli());
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("step 3") != std::string::npos);
  }
  const auto p = make_problem(0.1, LindbladSpec::none(), 1.0, 4);
  CHECK_THROWS_AS(propagate_forward(p, Hypothesis::Lower, ControlSet::zeros(3)), std::invalid_argument);
}

TEST_CASE("measure_pair rejects mismatched lengths") {
  const Trajectory a(std::vector<Vec4>(3, DensityMatrix::plus().pauli()));
  const Trajectory b(std::vector<Vec4>(4, DensityMatrix::plus().pauli()));
  CHECK_THROWS_AS(measure_pair(a, b), std::invalid_argument);
}
