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

#pragma once

// Data-parallel kernels. Each has a serial reference with identical
// arithmetic so results match bit for bit; tests compare the two and the
// benchmark target times them.

#include "liftguard/model.hpp"
#include "liftguard/subspace.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace liftguard::kernels {

enum class Exec { serial, parallel };

// ||R_k|| for k = 0..count-1 with R_0 = d, R_k = c a^{k-1} b.
std::vector<double> impulse_norms(const Matrix& a, const Matrix& c, const Matrix& b, const Matrix& d, int count,
                                  Exec exec = Exec::parallel);

// r_k = ||P_perp Y_k|| for window starts k = first..first+count-1, where
// Y_k stacks outputs[k..k+window-1] and P_perp kills span(range_basis).
std::vector<double> window_residuals(const Matrix& range_basis, const std::vector<Vector>& outputs, int window,
                                     int first, int count, Exec exec = Exec::parallel);

// Independent stream per (seed, index).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);
// Uniform sample from the ball of the given radius.
Vector sample_ball(std::mt19937_64& rng, Eigen::Index dim, double radius);

struct NoiseRun {
  double peak_output = 0.0;
  double peak_severity = 0.0;
};

// Noise-only runs from x0 = 0 with w_k uniform in the noise ball.
std::vector<NoiseRun> noise_runs(const DeviationSystem& sys, int runs, int frames, std::uint64_t seed,
                                 double noise_bound, Exec exec = Exec::parallel);

struct SearchResult {
  std::vector<double> ratios;  // max ||z|| / max ||y|| per policy
  double worst_ratio = 0.0;
  int worst_index = -1;
};

// Randomized attack policies (open-loop sequences, perturbed nulling
// policies around the friend, sparse impulses) simulated for
// attack_frames + tail_frames frames from x0 = 0. Severity is scored over
// all but the last n frames.
SearchResult stealth_search(const DeviationSystem& sys, const Friend& fr, int policies, int attack_frames,
                            int tail_frames, std::uint64_t seed, Exec exec = Exec::parallel);

int max_threads();

}  // namespace liftguard::kernels
