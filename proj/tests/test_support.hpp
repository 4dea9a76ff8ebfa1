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

// Random instance generators and brute-force oracles for the test suites.
// The oracles use plain stacked-matrix formulations and Eigen solvers only.

#include "liftguard/detect.hpp"
#include "liftguard/linalg.hpp"
#include "liftguard/model.hpp"

#include <Eigen/Eigenvalues>

#include <random>
#include <vector>

namespace liftguard::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n) { return random_matrix(rng, n, 1).col(0); }

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Random matrix rescaled to spectral radius `rho`.
inline Matrix random_stable(std::mt19937_64& rng, Eigen::Index n, double rho) {
  Matrix a = random_matrix(rng, n, n);
  const double r = Eigen::EigenSolver<Matrix>(a).eigenvalues().cwiseAbs().maxCoeff();
  return r > 0 ? Matrix(a * (rho / r)) : a;
}

inline Matrix orthonormal(std::mt19937_64& rng, Eigen::Index n, Eigen::Index k) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n, n));
  return Matrix(qr.householderQ()).leftCols(k);
}

inline DeviationSystem random_system(std::mt19937_64& rng, int n, int m, int p, int pz, double rho = 0.8,
                                     bool zero_d = false, int mw = 1) {
  DeviationSystem s;
  s.a = random_stable(rng, n, rho);
  s.b = random_matrix(rng, n, m);
  s.c = random_matrix(rng, p, n);
  s.d = zero_d ? Matrix::Zero(p, m) : random_matrix(rng, p, m);
  s.e = random_matrix(rng, pz, n);
  s.f = random_matrix(rng, pz, m);
  s.b_w = random_matrix(rng, n, mw);
  s.d_w = random_matrix(rng, p, mw);
  s.f_w = Matrix::Zero(pz, mw);
  return s;
}

// Random system whose output-nulling subspace is likely nontrivial.
inline DeviationSystem random_nulling_system(std::mt19937_64& rng, int n) {
  const int m = uniform_int(rng, 1, 3);
  const int p = uniform_int(rng, 1, std::max(1, std::min(m, n - 1)));
  const bool zero_d = uniform_int(rng, 0, 1) == 0;
  return random_system(rng, n, m, p, uniform_int(rng, 1, 2), 0.8, zero_d);
}

// Stacked window maps: O = [C; CA; ...], G lower block Toeplitz (D on the
// diagonal, C A^{i-j-1} B below), `frames` block rows.
inline Matrix stacked_observability(const Matrix& a, const Matrix& c, int frames) {
  Matrix o(c.rows() * frames, a.cols());
  Matrix ak = Matrix::Identity(a.rows(), a.cols());
  for (int k = 0; k < frames; ++k) {
    o.middleRows(k * c.rows(), c.rows()) = c * ak;
    ak = a * ak;
  }
  return o;
}

inline Matrix stacked_toeplitz(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d, int frames) {
  const Eigen::Index p = c.rows(), m = b.cols();
  Matrix g = Matrix::Zero(p * frames, m * frames);
  for (int i = 0; i < frames; ++i) {
    for (int j = 0; j <= i; ++j) {
      Matrix blk = d;
      if (i > j) {
        Matrix ak = Matrix::Identity(a.rows(), a.cols());
        for (int t = 0; t < i - j - 1; ++t) ak = a * ak;
        blk = c * ak * b;
      }
      g.block(i * p, j * m, p, m) = blk;
    }
  }
  return g;
}

// Horizon-n zero-output feasibility: initial states x0 for which some input
// sequence gives y_0 = ... = y_n = 0.
inline Matrix oracle_output_nulling(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d) {
  const int n = static_cast<int>(a.rows());
  const int frames = n + 1;
  const Matrix og = hstack(stacked_observability(a, c, frames), stacked_toeplitz(a, b, c, d, frames));
  Eigen::JacobiSVD<Matrix> svd(og, Eigen::ComputeFullV);
  const Vector sv = svd.singularValues();
  const double tol = 1e-9 * std::max(1.0, sv.size() ? sv(0) : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > tol;
  const Matrix kernel = svd.matrixV().rightCols(og.cols() - rank);
  const Matrix xs = kernel.topRows(n);
  if (xs.cols() == 0) return Matrix(n, 0);
  Eigen::JacobiSVD<Matrix> s2(xs, Eigen::ComputeFullU);
  int r2 = 0;
  for (Eigen::Index i = 0; i < s2.singularValues().size(); ++i) r2 += s2.singularValues()(i) > 1e-9;
  return s2.matrixU().leftCols(r2);
}

inline double max_principal_angle(const Matrix& u, const Matrix& v) {
  if (u.cols() != v.cols()) return 10.0;
  if (u.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(u.transpose() * v);
  const double c = std::min(1.0, svd.singularValues().minCoeff());
  return std::acos(c);
}

inline Matrix orth(const Matrix& m) {
  if (m.cols() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
  int r = 0;
  const double top = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) r += svd.singularValues()(i) > 1e-10 * std::max(1.0, top);
  return svd.matrixU().leftCols(r);
}

// Distance of v from span(basis) with a least-squares fit.
inline double residual_from_span(const Matrix& basis, const Vector& v) {
  if (basis.cols() == 0) return v.norm();
  const Vector c = basis.colPivHouseholderQr().solve(v);
  return (basis * c - v).norm();
}

inline NominalModel random_model(std::mt19937_64& rng, int n, int sensors, int modes, double rho = 0.8) {
  NominalModel m;
  const int mu = uniform_int(rng, 1, 2), mw = uniform_int(rng, 1, 2), pz = uniform_int(rng, 1, 2);
  m.a_hat = random_stable(rng, n, rho);
  m.b_u_hat = random_matrix(rng, n, mu);
  m.b_w = random_matrix(rng, n, mw);
  m.e_hat = random_matrix(rng, pz, n);
  for (int i = 0; i < sensors; ++i) {
    const int p = uniform_int(rng, 1, 2);
    m.sensors.push_back({"s" + std::to_string(i), random_matrix(rng, p, n), random_matrix(rng, p, mu),
                         random_matrix(rng, p, mw)});
  }
  for (int q = 0; q < modes; ++q) {
    AttackMode mode;
    mode.id = "m" + std::to_string(q);
    const int ma = uniform_int(rng, 1, 2);
    mode.b_a = random_matrix(rng, n, ma);
    // Each mode corrupts a random subset of sensors.
    for (int i = 0; i < sensors; ++i) {
      if (uniform_int(rng, 0, 1)) mode.d_a[m.sensors[i].name] = random_matrix(rng, m.sensors[i].outputs(), ma);
    }
    m.modes.push_back(mode);
  }
  return m;
}

// Random multi-rate schedule: each sensor gets a random nonempty subset of offsets.
inline SensorSchedule random_schedule(std::mt19937_64& rng, std::size_t sensors, int period) {
  SensorSchedule s;
  s.frame_period = period;
  for (std::size_t i = 0; i < sensors; ++i) {
    std::vector<int> offs;
    for (int t = 0; t < period; ++t) {
      if (uniform_int(rng, 0, 2) == 0) offs.push_back(t);
    }
    if (offs.empty()) offs.push_back(uniform_int(rng, 0, period - 1));
    s.samples.push_back(offs);
  }
  return s;
}

struct StepSignals {
  std::vector<Vector> u, a, w;  // per-step inputs, frames * period entries
};

inline StepSignals random_signals(std::mt19937_64& rng, const NominalModel& m, Eigen::Index ma, int steps) {
  StepSignals s;
  for (int t = 0; t < steps; ++t) {
    s.u.push_back(random_vector(rng, m.input_dim()));
    s.a.push_back(random_vector(rng, ma));
    s.w.push_back(random_vector(rng, m.noise_dim()));
  }
  return s;
}

// Per-step recursion sampled per the schedule, grouped into frames:
// returns y blocks (lifted row order) and z blocks for each frame.
struct StepReference {
  std::vector<Vector> x, y, z;
};

inline StepReference step_reference(const NominalModel& m, const SensorSchedule& sched, const std::string& mode,
                                    const Vector& x0, const StepSignals& sig, int frames) {
  const AttackMode& md = m.mode(mode);
  const int period = sched.frame_period;
  StepReference ref;
  Vector x = x0;
  for (int k = 0; k < frames; ++k) {
    ref.x.push_back(x);
    std::vector<std::vector<Vector>> per_sensor(m.sensors.size());
    Vector z(period * m.severity_dim());
    for (int t = 0; t < period; ++t) {
      const std::size_t i_step = static_cast<std::size_t>(k * period + t);
      const Vector& u = sig.u[i_step];
      const Vector& a = sig.a[i_step];
      const Vector& w = sig.w[i_step];
      for (std::size_t s = 0; s < m.sensors.size(); ++s) {
        const auto& sen = m.sensors[s];
        per_sensor[s].push_back(sen.c * x + sen.d_u * u + m.d_a(s, md) * a + sen.d_w * w);
      }
      z.segment(t * m.severity_dim(), m.severity_dim()) = m.e_hat * x;
      x = m.a_hat * x + m.b_u_hat * u + md.b_a * a + m.b_w * w;
    }
    Eigen::Index rows = 0;
    for (std::size_t s = 0; s < m.sensors.size(); ++s) rows += m.sensors[s].outputs() * sched.samples[s].size();
    Vector y(rows);
    Eigen::Index r = 0;
    for (std::size_t s = 0; s < m.sensors.size(); ++s) {
      for (int off : sched.samples[s]) {
        const Vector& v = per_sensor[s][static_cast<std::size_t>(off)];
        y.segment(r, v.size()) = v;
        r += v.size();
      }
    }
    ref.y.push_back(y);
    ref.z.push_back(z);
  }
  ref.x.push_back(x);
  return ref;
}

inline std::vector<Vector> frame_blocks(const std::vector<Vector>& steps, int period, int frames) {
  std::vector<Vector> out;
  for (int k = 0; k < frames; ++k) {
    const Eigen::Index d = steps.front().size();
    Vector b(d * period);
    for (int t = 0; t < period; ++t) b.segment(t * d, d) = steps[static_cast<std::size_t>(k * period + t)];
    out.push_back(b);
  }
  return out;
}

inline double rel_err(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace liftguard::testing
