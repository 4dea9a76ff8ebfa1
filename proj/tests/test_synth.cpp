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
#include "soundness.hpp"

#include "liftguard/errors.hpp"
#include "liftguard/synth.hpp"

using namespace liftguard;
using namespace liftguard::testing;

namespace {

DeviationSystem hidden_channel() {
  DeviationSystem s;
  s.a = Matrix::Zero(2, 2);
  s.a(0, 0) = 0.5;
  s.a(1, 1) = 0.3;
  s.b = Matrix::Zero(2, 1);
  s.b(1, 0) = 1;
  s.c = Matrix::Zero(1, 2);
  s.c(0, 0) = 1;
  s.d = Matrix::Zero(1, 1);
  s.e = Matrix::Zero(1, 2);
  s.e(0, 1) = 1;
  s.f = Matrix::Zero(1, 1);
  s.normalize();
  return s;
}

DeviationSystem scalar_zero(double a, double d) {
  DeviationSystem s;
  s.a = Matrix::Constant(1, 1, a);
  s.b = Matrix::Constant(1, 1, 1.0);
  s.c = Matrix::Constant(1, 1, 1.0);
  s.d = Matrix::Constant(1, 1, d);
  s.e = Matrix::Constant(1, 1, 1.0);
  s.f = Matrix::Zero(1, 1);
  s.normalize();
  return s;
}

// Expresses ambient columns in the V* basis of a report.
Matrix v_star_coords(const DetectabilityReport& r, const Matrix& ambient) { return r.map.v_star.transpose() * ambient; }

}  // namespace

TEST_CASE("kernel-direction plan: one frame, nothing observable") {
  std::mt19937_64 rng(50);
  DeviationSystem s = random_system(rng, 3, 2, 2, 1);
  s.b.col(1).setZero();
  s.d.col(1).setZero();
  const DetectabilityReport r = analyze_detectability(s);
  REQUIRE(r.condition == Condition::i);
  const AttackPlan p = synthesize(s, r);
  CHECK(p.kind == PlanKind::kernel_direction);
  const Replay rp = replay(s, p, 1e300, 20);
  CHECK(rp.max_output < 1e-12);
  CHECK(rp.max_severity == doctest::Approx(10.0));
  const Replay r2 = replay(s, p.scaled(2.0), 1e300, 20);
  CHECK(r2.max_severity == doctest::Approx(20.0));
  CHECK_THROWS_AS(synth_condition_i(s, Vector::Unit(2, 0) * 0.0, 10.0), NumericalError);
}

TEST_CASE("nulling-policy plan keeps y at zero") {
  const DeviationSystem s = hidden_channel();
  const DetectabilityReport r = analyze_detectability(s);
  REQUIRE(r.condition == Condition::ii);
  const AttackPlan p = synthesize(s, r);
  const Replay rp = replay(s, p, 10.0 * (1 - 1e-12), 20);
  CHECK(rp.max_output < 1e-8);
  CHECK(rp.severity_frame >= 0);
  CHECK(rp.severity_frame <= p.certificate.onset_frame);
  CHECK(replay(s, p.scaled(2.0), 1e300, 20).max_severity == doctest::Approx(2.0 * rp.max_severity));
}

TEST_CASE("geometric plan on an unstable zero") {
  const DeviationSystem s = scalar_zero(0.5, 0.25);  // zero at -3.5
  const DetectabilityReport r = analyze_detectability(s);
  REQUIRE(r.condition == Condition::iii);
  SynthOptions o;
  o.stealth_budget = 1e-3;
  const AttackPlan p = synthesize(s, r, o);
  CHECK(p.kind == PlanKind::eig_case1);
  CHECK(p.certificate.law == GrowthLaw::geometric);
  CHECK(p.certificate.rate == doctest::Approx(3.5));
  const Replay rp = replay(s, p, 10.0, 100);
  CHECK(rp.severity_frame > 0);
  CHECK(rp.max_output <= 1e-3 * (1 + 1e-9));
}

TEST_CASE("steering reaches the target and tracks the ramp") {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 20; ++t) {
    const int n = uniform_int(rng, 2, 5);
    const DeviationSystem s = random_system(rng, n, 2, 1, 1);
    const Vector target = random_vector(rng, n);
    const SteeringResult a = steer(s, target, n, 1e-8, 0.0);
    const SteeringResult b = steer(s, target, n, 1e-8, 100.0);
    CHECK(a.steering_error < 1e-8);
    CHECK(b.steering_error < 1e-8);
    CHECK(a.inputs.size() == static_cast<std::size_t>(n));
  }
  CHECK_THROWS_AS(steer(scalar_zero(0.5, 1.0), Vector::Ones(2), 1), DimensionError);
}

TEST_CASE("linear growth on a defective unit zero") {
  // D = 1 forces M = -C, so the zero dynamics are A - b c = J_2(1); severity
  // sees the eigenvector, which picks the two-step chain plan.
  DeviationSystem s;
  Matrix j(2, 2);
  j << 1, 1, 0, 1;
  s.b = Matrix::Zero(2, 1);
  s.b(1, 0) = 1;
  s.c = Matrix::Zero(1, 2);
  s.c(0, 0) = 0.3;
  s.c(0, 1) = 0.2;
  s.a = j + s.b * s.c;
  s.d = Matrix::Identity(1, 1);
  s.e = Matrix::Zero(1, 2);
  s.e(0, 0) = 1;
  s.f = Matrix::Zero(1, 1);
  s.normalize();
  const DetectabilityReport r = analyze_detectability(s);
  REQUIRE(r.condition == Condition::iii);
  // The detector stops at the shortest escaping chain, the eigenvector.
  CHECK(r.witness_iii->jordan_size == 1);

  // Full chain (e1, e2) by hand: eta_0 = 1, so i* = 0 < 2 gives the chain plan.
  ConditionIIIWitness w;
  w.lambda = 1.0;
  w.jordan_size = 2;
  w.chain = v_star_coords(r, Matrix::Identity(2, 2));
  w.j_block = j;
  w.gain = Matrix::Zero(0, 2);
  w.m_with_gain = r.friend_used.m;
  w.eta = (s.e + s.f * r.friend_used.m) * r.map.v_star * w.chain;
  w.i_star = 0;
  const AttackPlan p = synth_condition_iii(s, r.friend_used, w, r.map.v_star, 1e-3);
  CHECK(p.kind == PlanKind::eig_case2);
  CHECK(p.certificate.law == GrowthLaw::linear);
  const Replay rp = replay(s, p, 10.0, frames_needed(p, 10.0, 400000));
  CHECK(rp.severity_frame > 0);
  CHECK(rp.max_output <= 1e-3 * (1 + 1e-6));
  // Severity grows by a constant step once the prelude is over.
  Vector x = Vector::Zero(2);
  std::vector<double> z;
  for (int k = 0; k < 40; ++k) {
    const Vector a = p.input(k, x);
    z.push_back((s.e * x + s.f * a).norm());
    x = s.a * x + s.b * a;
  }
  CHECK(z[30] - z[29] == doctest::Approx(z[20] - z[19]).epsilon(1e-6));
  CHECK(z[30] - z[29] == doctest::Approx(p.certificate.rate).epsilon(1e-6));
}

TEST_CASE("unit-modulus rotation plan stays within budget while severity ramps") {
  // x+ = R x + b a, y = c x + a, with R a rotation: the zero sits at R - b c.
  const double th = 0.7;
  DeviationSystem s;
  Matrix rot(2, 2);
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  s.b = Matrix::Zero(2, 1);
  s.b(0, 0) = 1;
  s.c = Matrix::Zero(1, 2);
  s.c(0, 0) = 0.3;
  s.a = rot + s.b * s.c;  // A + B M with M = -C is the rotation
  s.d = Matrix::Identity(1, 1);
  s.e = Matrix::Identity(2, 2);
  s.f = Matrix::Zero(2, 1);
  s.normalize();
  const DetectabilityReport r = analyze_detectability(s);
  REQUIRE(r.condition == Condition::iii);
  CHECK(std::abs(std::abs(r.witness_iii->lambda) - 1.0) < 1e-9);
  const AttackPlan p = synthesize(s, r);
  CHECK(p.kind == PlanKind::eig_case3);
  const Replay rp = replay(s, p, 10.0, frames_needed(p, 10.0, 400000));
  CHECK(rp.severity_frame > 0);
  CHECK(rp.max_output <= 1e-3 * (1 + 1e-6));
}

TEST_CASE("synthesize refuses detectable reports") {
  const DeviationSystem s = scalar_zero(0.5, 2.0);
  CHECK_THROWS_AS(synthesize(s, analyze_detectability(s)), Error);
}

TEST_CASE("verdict soundness on random systems") {
  const SoundnessSummary sm = soundness_loop(52, 60, 200);
  for (const auto& f : sm.failures) MESSAGE(f);
  CHECK(sm.vulnerable > 5);
  CHECK(sm.detectable > 5);
  CHECK(sm.vulnerable_failed == 0);
  CHECK(sm.detectable_failed == 0);
}
