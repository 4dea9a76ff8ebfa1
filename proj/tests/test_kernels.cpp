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

#include "liftguard/kernels.hpp"
#include "liftguard/subspace.hpp"

using namespace liftguard;
using namespace liftguard::testing;
using kernels::Exec;

TEST_CASE("impulse norms: serial and parallel agree bit for bit") {
  std::mt19937_64 rng(70);
  const DeviationSystem s = random_system(rng, 6, 3, 4, 2, 0.95);
  const auto a = kernels::impulse_norms(s.a, s.c, s.b, s.d, 300, Exec::serial);
  const auto b = kernels::impulse_norms(s.a, s.c, s.b, s.d, 300, Exec::parallel);
  REQUIRE(a.size() == 300);
  CHECK(a == b);
  CHECK(a[0] == doctest::Approx(Eigen::JacobiSVD<Matrix>(s.d).singularValues()(0)));
  CHECK(a[2] == doctest::Approx(Eigen::JacobiSVD<Matrix>(s.c * s.a * s.b).singularValues()(0)));
}

TEST_CASE("window residuals: serial and parallel agree bit for bit") {
  std::mt19937_64 rng(71);
  const Matrix basis = orth(random_matrix(rng, 12, 5));
  std::vector<Vector> y;
  for (int k = 0; k < 80; ++k) y.push_back(random_vector(rng, 3));
  const auto a = kernels::window_residuals(basis, y, 4, 3, 70, Exec::serial);
  const auto b = kernels::window_residuals(basis, y, 4, 3, 70, Exec::parallel);
  CHECK(a == b);
  Vector w(12);
  for (int j = 0; j < 4; ++j) w.segment(3 * j, 3) = y[static_cast<std::size_t>(3 + j)];
  CHECK(a[0] == doctest::Approx((w - basis * (basis.transpose() * w)).norm()));
}

TEST_CASE("noise runs: serial and parallel agree bit for bit") {
  std::mt19937_64 rng(72);
  const DeviationSystem s = random_system(rng, 4, 1, 2, 1, 0.8, false, 2);
  const auto a = kernels::noise_runs(s, 16, 50, 9, 1.0, Exec::serial);
  const auto b = kernels::noise_runs(s, 16, 50, 9, 1.0, Exec::parallel);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].peak_output == b[i].peak_output);
    CHECK(a[i].peak_severity == b[i].peak_severity);
  }
  const auto c = kernels::noise_runs(s, 16, 50, 10, 1.0, Exec::serial);
  CHECK(c[0].peak_output != a[0].peak_output);
}

TEST_CASE("stealth search: serial and parallel agree bit for bit") {
  std::mt19937_64 rng(73);
  const DeviationSystem s = random_nulling_system(rng, 3);
  const Subspace v = max_output_nulling(s.a, s.b, s.c, s.d);
  const Friend fr = compute_friend(v, s.a, s.b, s.c, s.d);
  const auto a = kernels::stealth_search(s, fr, 64, 12, 6, 4, Exec::serial);
  const auto b = kernels::stealth_search(s, fr, 64, 12, 6, 4, Exec::parallel);
  CHECK(a.ratios == b.ratios);
  CHECK(a.worst_index == b.worst_index);
  CHECK(a.worst_ratio == b.worst_ratio);
}

TEST_CASE("stream seeds are deterministic and distinct") {
  CHECK(kernels::stream_seed(7, 3) == kernels::stream_seed(7, 3));
  CHECK(kernels::stream_seed(7, 3) != kernels::stream_seed(7, 4));
  CHECK(kernels::stream_seed(7, 3) != kernels::stream_seed(8, 3));
  std::mt19937_64 rng(74);
  for (int t = 0; t < 200; ++t) CHECK(kernels::sample_ball(rng, 3, 2.0).norm() <= 2.0);
  CHECK(kernels::max_threads() >= 1);
}
