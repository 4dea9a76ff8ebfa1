// Copyright 2026 The liftguard Authors
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

#include "doctest.h"
#include "test_support.hpp"

#include "liftguard/errors.hpp"
#include "liftguard/model.hpp"

using namespace liftguard;
using namespace liftguard::testing;

namespace {

NominalModel scalar_model() {
  NominalModel m;
  m.a_hat = Matrix::Constant(1, 1, 0.5);
  m.b_u_hat = Matrix::Constant(1, 1, 1.0);
  m.b_w = Matrix::Constant(1, 1, 0.1);
  m.e_hat = Matrix::Constant(1, 1, 1.0);
  m.sensors.push_back({"s", Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 0.0), Matrix::Constant(1, 1, 0.3)});
  m.modes.push_back({"q", Matrix::Constant(1, 1, 1.0), {{"s", Matrix::Constant(1, 1, 1.0)}}});
  return m;
}

}  // namespace

TEST_CASE("T = 1 with every sensor sampled reproduces the step model") {
  std::mt19937_64 rng(10);
  const NominalModel m = random_model(rng, 3, 2, 1);
  const LiftedPlant p = lift(m, SensorSchedule::every_step(m.sensors.size()));
  CHECK((p.a - m.a_hat).norm() == 0.0);
  CHECK((p.b_u - m.b_u_hat).norm() == 0.0);
  CHECK((p.e - m.e_hat).norm() == 0.0);
  CHECK((p.c.topRows(m.sensors[0].outputs()) - m.sensors[0].c).norm() == 0.0);
  const auto& ch = p.channels(m.modes[0].id);
  CHECK((ch.b_a - m.modes[0].b_a).norm() == 0.0);
  CHECK(ch.f_a.norm() == 0.0);
}

TEST_CASE("scalar T = 2 lifting by hand") {
  const NominalModel m = scalar_model();
  SensorSchedule s;
  s.frame_period = 2;
  s.samples = {{0, 1}};
  const LiftedPlant p = lift(m, s);
  CHECK(p.a(0, 0) == doctest::Approx(0.25));
  // B^u blocks: [A B, B]
  CHECK(p.b_u(0, 0) == doctest::Approx(0.5));
  CHECK(p.b_u(0, 1) == doctest::Approx(1.0));
  // C rows [C; C A]
  CHECK(p.c(0, 0) == doctest::Approx(2.0));
  CHECK(p.c(1, 0) == doctest::Approx(1.0));
  const auto& ch = p.channels("q");
  // D^a: offset 0 -> [D, 0]; offset 1 -> [C B, D]
  CHECK(ch.d_a(0, 0) == doctest::Approx(1.0));
  CHECK(ch.d_a(0, 1) == doctest::Approx(0.0));
  CHECK(ch.d_a(1, 0) == doctest::Approx(2.0));
  CHECK(ch.d_a(1, 1) == doctest::Approx(1.0));
  CHECK(ch.f_a(1, 0) == doctest::Approx(1.0));
  CHECK(ch.f_a(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("lifted recursion matches the per-step recursion at sampled instants") {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = uniform_int(rng, 1, 5);
    const int period = uniform_int(rng, 1, 6);
    const NominalModel m = random_model(rng, n, uniform_int(rng, 1, 3), 1);
    const SensorSchedule sched = random_schedule(rng, m.sensors.size(), period);
    const LiftedPlant p = lift(m, sched);
    const std::string mode = m.modes[0].id;
    const auto& ch = p.channels(mode);
    const int frames = 6;
    StepSignals sig = random_signals(rng, m, m.modes[0].b_a.cols(), frames * period);
    // The lifted severity map has no nominal-input channel; compare z on u = 0 runs.
    const bool check_z = trial % 2 == 0;
    if (check_z) {
      for (auto& v : sig.u) v.setZero();
    }
    const Vector x0 = random_vector(rng, n);
    const StepReference ref = step_reference(m, sched, mode, x0, sig, frames);
    const auto u = frame_blocks(sig.u, period, frames), a = frame_blocks(sig.a, period, frames),
               w = frame_blocks(sig.w, period, frames);
    Vector x = x0;
    for (int k = 0; k < frames; ++k) {
      const std::size_t i = static_cast<std::size_t>(k);
      const Vector y = p.c * x + p.d_u * u[i] + ch.d_a * a[i] + p.d_w * w[i];
      const Vector z = p.e * x + ch.f_a * a[i] + p.f_w * w[i];
      worst = std::max({worst, rel_err(x, ref.x[i]), rel_err(y, ref.y[i]), check_z ? rel_err(z, ref.z[i]) : 0.0});
      x = p.a * x + p.b_u * u[i] + ch.b_a * a[i] + p.b_w * w[i];
    }
    worst = std::max(worst, rel_err(x, ref.x.back()));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("row layout is sensor-major then offset") {
  const NominalModel m = scalar_model();
  SensorSchedule s;
  s.frame_period = 3;
  s.samples = {{0, 2}};
  const LiftedPlant p = lift(m, s);
  REQUIRE(p.rows.size() == 2);
  CHECK(p.rows[0].offset == 0);
  CHECK(p.rows[1].offset == 2);
  CHECK(p.c(1, 0) == doctest::Approx(2.0 * 0.25));
  s.samples = {{2, 0}};
  CHECK_THROWS_AS(lift(m, s), DimensionError);
}

TEST_CASE("schedule and model validation") {
  NominalModel m = scalar_model();
  SensorSchedule s;
  s.frame_period = 2;
  s.samples = {{2}};
  CHECK_THROWS_AS(lift(m, s), DimensionError);
  s.samples = {};
  CHECK_THROWS_AS(lift(m, s), DimensionError);
  s.frame_period = 0;
  s.samples = {{0}};
  CHECK_THROWS_AS(lift(m, s), DimensionError);

  m.a_hat(0, 0) = 1.2;
  CHECK_THROWS_AS(lift(m, SensorSchedule::every_step(1)), UnstableModelError);
  LiftOptions lax;
  lax.strict = false;
  CHECK_NOTHROW(lift(m, SensorSchedule::every_step(1), lax));

  NominalModel bad = scalar_model();
  bad.sensors[0].c = Matrix::Zero(1, 2);
  CHECK_THROWS_AS(bad.validate(), DimensionError);
  CHECK_THROWS(scalar_model().mode("missing"));
}

TEST_CASE("mode without an entry for a sensor gets zero feedthrough") {
  NominalModel m = scalar_model();
  m.modes[0].d_a.clear();
  const Matrix d = m.d_a(0, m.modes[0]);
  CHECK(d.rows() == 1);
  CHECK(d.cols() == 1);
  CHECK(d.norm() == 0.0);
}

TEST_CASE("deviation system simulation obeys its recursion") {
  std::mt19937_64 rng(12);
  const NominalModel m = random_model(rng, 4, 2, 1);
  const LiftedPlant p = lift(m, random_schedule(rng, 2, 3));
  const DeviationSystem sys = deviation_system(p, m.modes[0].id);
  std::vector<Vector> blocks;
  for (int k = 0; k < 10; ++k) blocks.push_back(random_vector(rng, sys.attack_dim()));
  const SimulationTrace tr = simulate(sys, random_vector(rng, 4), sequence_source(blocks, sys.attack_dim()),
                                      [&](int, const Vector&) { return random_vector(rng, sys.noise_dim()); }, 15);
  CHECK(tr.frames() == 15);
  CHECK(recursion_residual(sys, tr) < 1e-12);
  CHECK(tr.a[12].norm() == 0.0);

  const DeviationSystem none = deviation_system(p, std::nullopt);
  CHECK(none.attack_dim() == 0);
}

TEST_CASE("truncated source stops after the last frame") {
  const InputSource s = truncate_source([](int, const Vector&) { return Vector::Ones(2); }, 3, 2);
  CHECK(s(3, Vector()).norm() > 0);
  CHECK(s(4, Vector()).norm() == 0);
}

TEST_CASE("pack_blocks groups steps and zero-pads the tail") {
  std::vector<Vector> steps;
  for (int t = 0; t < 5; ++t) steps.push_back(Vector::Constant(1, t + 1.0));
  const auto b = pack_blocks(steps, 2, 1);
  REQUIRE(b.size() == 3);
  CHECK(b[0](1) == 2.0);
  CHECK(b[2](0) == 5.0);
  CHECK(b[2](1) == 0.0);
}
