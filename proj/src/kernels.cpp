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

#include "liftguard/kernels.hpp"

#include "liftguard/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace liftguard::kernels {

namespace {

// Stealth-search policy for one index; deterministic given the seed.
double run_policy(const DeviationSystem& sys, const Friend& fr, int attack_frames, int tail_frames,
                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index n = sys.state_dim();
  const Eigen::Index m = sys.attack_dim();
  const Eigen::Index r = fr.n.cols();
  const int family = static_cast<int>(rng() % 4);
  const double noise_level = std::pow(10.0, -6.0 * unif(rng));
  const int impulse_frame = static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(1, attack_frames)));
  Matrix k = Matrix::Zero(m, n);
  if (family == 2) {
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < n; ++j) k(i, j) = gauss(rng);
  }
  auto randn = [&](Eigen::Index d) {
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = gauss(rng);
    return v;
  };

  Vector x = Vector::Zero(n);
  double ymax = 0.0, zmax = 0.0;
  const int frames = attack_frames + tail_frames;
  // z is scored only where n further outputs were observed.
  const int scored = frames > static_cast<int>(n) ? frames - static_cast<int>(n) : frames;
  for (int f = 0; f < frames; ++f) {
    Vector a = Vector::Zero(m);
    if (f < attack_frames && m > 0) {
      switch (family) {
        case 0:
          a = randn(m);
          break;
        case 1:
          a = fr.m * x + noise_level * randn(m);
          if (r > 0) a += fr.n * randn(r);
          if (f < static_cast<int>(n)) a += randn(m);
          break;
        case 2:
          a = (fr.m + noise_level * k) * x;
          if (r > 0) a += fr.n * randn(r);
          if (f == 0) a += randn(m);
          break;
        default:
          if (f == impulse_frame) a = randn(m);
          break;
      }
    }
    const Vector y = sys.c * x + sys.d * a;
    const Vector z = sys.e * x + sys.f * a;
    ymax = std::max(ymax, y.norm());
    if (f < scored) zmax = std::max(zmax, z.norm());
    x = sys.a * x + sys.b * a;
  }
  if (zmax == 0.0) return 0.0;
  if (ymax == 0.0) return std::numeric_limits<double>::infinity();
  return zmax / ymax;
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over the combined key
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Vector sample_ball(std::mt19937_64& rng, Eigen::Index dim, double radius) {
  if (dim == 0) return Vector(0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = gauss(rng);
  const double nv = v.norm();
  if (nv == 0.0) return Vector::Zero(dim);
  return v * (radius * std::pow(unif(rng), 1.0 / static_cast<double>(dim)) / nv);
}

std::vector<double> impulse_norms(const Matrix& a, const Matrix& c, const Matrix& b, const Matrix& d, int count,
                                  Exec exec) {
  std::vector<double> out(static_cast<std::size_t>(std::max(0, count)), 0.0);
  if (count <= 0) return out;
  // Markov parameters are built serially; only the SVDs run in parallel.
  std::vector<Matrix> terms(static_cast<std::size_t>(count));
  terms[0] = d;
  Matrix ca = c;
  for (int k = 1; k < count; ++k) {
    terms[static_cast<std::size_t>(k)] = ca * b;
    ca = ca * a;
  }
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = spectral_norm(terms[static_cast<std::size_t>(k)]);
  } else {
    for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = spectral_norm(terms[static_cast<std::size_t>(k)]);
  }
  return out;
}

std::vector<double> window_residuals(const Matrix& q, const std::vector<Vector>& outputs, int window, int first,
                                     int count, Exec exec) {
  if (count <= 0) return {};
  if (first < 0 || static_cast<std::size_t>(first + count - 1 + window) > outputs.size()) {
    throw DimensionError("window_residuals: trace too short for the requested windows");
  }
  const Eigen::Index p = outputs.empty() ? 0 : outputs.front().size();
  if (q.rows() != p * window) throw DimensionError("window_residuals: range basis has the wrong row count");
  std::vector<double> out(static_cast<std::size_t>(count));
  auto one = [&](int i) {
    Vector y(p * window);
    for (int j = 0; j < window; ++j) y.segment(j * p, p) = outputs[static_cast<std::size_t>(first + i + j)];
    if (q.cols() > 0) y -= q * (q.transpose() * y);
    out[static_cast<std::size_t>(i)] = y.norm();
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; ++i) one(i);
  } else {
    for (int i = 0; i < count; ++i) one(i);
  }
  return out;
}

std::vector<NoiseRun> noise_runs(const DeviationSystem& sys_in, int runs, int frames, std::uint64_t seed,
                                 double noise_bound, Exec exec) {
  DeviationSystem sys = sys_in;
  sys.normalize();
  std::vector<NoiseRun> out(static_cast<std::size_t>(std::max(0, runs)));
  auto one = [&](int r) {
    std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(r)));
    Vector x = Vector::Zero(sys.state_dim());
    NoiseRun nr;
    for (int k = 0; k < frames; ++k) {
      const Vector w = sample_ball(rng, sys.noise_dim(), noise_bound);
      nr.peak_output = std::max(nr.peak_output, (sys.c * x + sys.d_w * w).norm());
      nr.peak_severity = std::max(nr.peak_severity, (sys.e * x + sys.f_w * w).norm());
      x = sys.a * x + sys.b_w * w;
    }
    out[static_cast<std::size_t>(r)] = nr;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < runs; ++r) one(r);
  } else {
    for (int r = 0; r < runs; ++r) one(r);
  }
  return out;
}

SearchResult stealth_search(const DeviationSystem& sys_in, const Friend& fr, int policies, int attack_frames,
                            int tail_frames, std::uint64_t seed, Exec exec) {
  DeviationSystem sys = sys_in;
  sys.normalize();
  SearchResult res;
  res.ratios.assign(static_cast<std::size_t>(std::max(0, policies)), 0.0);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < policies; ++i) {
      res.ratios[static_cast<std::size_t>(i)] =
          run_policy(sys, fr, attack_frames, tail_frames, stream_seed(seed, static_cast<std::uint64_t>(i)));
    }
  } else {
    for (int i = 0; i < policies; ++i) {
      res.ratios[static_cast<std::size_t>(i)] =
          run_policy(sys, fr, attack_frames, tail_frames, stream_seed(seed, static_cast<std::uint64_t>(i)));
    }
  }
  for (int i = 0; i < policies; ++i) {
    if (res.ratios[static_cast<std::size_t>(i)] > res.worst_ratio) {
      res.worst_ratio = res.ratios[static_cast<std::size_t>(i)];
      res.worst_index = i;
    }
  }
  return res;
}

}  // namespace liftguard::kernels
