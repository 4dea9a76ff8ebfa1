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

// Property checks for friend differences, nulling policies, eigenvector
// push-forward and the projector sum formula. Each returns the largest
// relative residual for one random instance, or a negative value when the
// instance is degenerate (trivial subspace) and should be redrawn.

#include "test_support.hpp"

#include "liftguard/subspace.hpp"

namespace liftguard::testing {

inline double rel(double num, double scale) { return num / std::max(1.0, scale); }

// Second friend built from the free directions {u : D u = 0, B u in V}.
inline Friend perturbed_friend(std::mt19937_64& rng, const DeviationSystem& s, const Friend& fr) {
  const Matrix& vb = fr.v.basis();
  const Eigen::Index n = s.state_dim(), m = s.attack_dim();
  const Subspace phi = null_space(vstack(s.d, fr.v.complement_projector() * s.b), 1e-10);
  Friend out = fr;
  out.m = fr.m + random_matrix(rng, m, n) * (Matrix::Identity(n, n) - vb * vb.transpose());
  if (phi.dim() > 0) {
    out.m += phi.basis() * random_matrix(rng, phi.dim(), vb.cols()) * vb.transpose();
    out.n = phi.basis() * random_matrix(rng, phi.dim(), phi.dim());
  } else {
    out.n = Matrix::Zero(m, 0);
  }
  return out;
}

inline double lemma_friend_difference(std::mt19937_64& rng, const DeviationSystem& s) {
  const Subspace v = max_output_nulling(s.a, s.b, s.c, s.d);
  if (v.dim() == 0) return -1.0;
  const Friend hat = compute_friend(v, s.a, s.b, s.c, s.d);
  const Friend bar = perturbed_friend(rng, s, hat);
  verify_friend(bar, s.a, s.b, s.c, s.d);
  const Matrix& vb = v.basis();
  const Matrix diff = (hat.m - bar.m) * vb;
  const Matrix bn = s.b * hat.n;
  const double scale = std::max(1.0, diff.norm());
  double worst = 0.0;
  // B (M^ - M-) V lies in Im(B N^).
  const Matrix bd = s.b * diff;
  for (Eigen::Index j = 0; j < bd.cols(); ++j) worst = std::max(worst, rel(residual_from_span(bn, bd.col(j)), scale));
  // (M^ - M-) V = N^ K + H with H in ker B and ker D.
  Matrix k = bn.cols() ? Matrix(pinv(bn) * bd) : Matrix::Zero(0, diff.cols());
  const Matrix h = diff - hat.n * k;
  worst = std::max(worst, rel((s.b * h).norm() + (s.d * h).norm(), scale));
  // N- = N^ L + H_N.
  if (bar.n.cols() > 0) {
    const Matrix bnb = s.b * bar.n;
    const Matrix l = bn.cols() ? Matrix(pinv(bn) * bnb) : Matrix::Zero(0, bar.n.cols());
    const Matrix hn = bar.n - hat.n * l;
    worst = std::max(worst, rel((s.b * hn).norm() + (s.d * hn).norm(), std::max(1.0, bar.n.norm())));
  }
  return worst;
}

// Soundness: x0 in V and a = M x + N a~ keep y at zero. Completeness: any
// zero-output pair has x_k in V and a_k - M x_k in Im N + (ker B and ker D).
inline double lemma_nulling_policy(std::mt19937_64& rng, const DeviationSystem& s) {
  const Subspace v = max_output_nulling(s.a, s.b, s.c, s.d);
  if (v.dim() == 0) return -1.0;
  const Friend fr = compute_friend(v, s.a, s.b, s.c, s.d);
  const int n = static_cast<int>(s.state_dim());
  const int horizon = 3 * n + 3;
  double worst = 0.0;

  Vector x = v.basis() * random_vector(rng, v.dim());
  const double scale = std::max(1.0, x.norm());
  for (int k = 0; k < horizon; ++k) {
    Vector a = fr.m * x;
    if (fr.n.cols() > 0) a += fr.n * random_vector(rng, fr.n.cols());
    worst = std::max(worst, rel((s.c * x + s.d * a).norm(), scale * std::max(1.0, a.norm())));
    x = s.a * x + s.b * a;
  }

  const Eigen::Index m = s.attack_dim();
  const Matrix og = hstack(stacked_observability(s.a, s.c, horizon), stacked_toeplitz(s.a, s.b, s.c, s.d, horizon));
  const Subspace ker = null_space(og, 1e-10);
  if (ker.dim() == 0) return worst;
  const Vector sol = ker.basis() * random_vector(rng, ker.dim());
  x = sol.head(n);
  const Matrix free = hstack(fr.n, null_space(vstack(s.b, s.d)).basis());
  for (int k = 0; k + n + 1 <= horizon; ++k) {
    const Vector a = sol.segment(n + k * m, m);
    worst = std::max(worst, rel(v.distance(x) * x.norm(), std::max(1.0, sol.norm())));
    worst = std::max(worst, rel(residual_from_span(free, a - fr.m * x), std::max(1.0, sol.norm())));
    x = s.a * x + s.b * a;
  }
  return worst;
}

// Chains of the restricted map pushed forward by V* are chains of A + B M.
inline double lemma_push_forward(const DeviationSystem& s) {
  const Subspace v = max_output_nulling(s.a, s.b, s.c, s.d);
  if (v.dim() == 0) return -1.0;
  const Friend fr = compute_friend(v, s.a, s.b, s.c, s.d);
  const Subspace vs = intersect(v, controllable_subspace(s.a, s.b));
  if (vs.dim() == 0) return -1.0;
  const RestrictedMap map = restrict_map(vs, fr, s.a, s.b);
  const Matrix am = s.a + s.b * fr.m;
  double worst = 0.0;
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Matrix>(am).eigenvalues();
  for (const auto& e : eig_structure(map)) {
    const Matrix sg = map.v_star * e.chain;
    const Matrix j = real_jordan_block(e.lambda, e.jordan_size, e.is_complex);
    worst = std::max(worst, rel((am * sg - sg * j).norm(), std::max(1.0, am.norm()) * sg.norm()));
    double dist = 1e300;
    for (Eigen::Index i = 0; i < ev.size(); ++i) dist = std::min(dist, std::abs(ev(i) - e.lambda));
    // A defective eigenvalue of multiplicity s moves by about eps^(1/s).
    worst = std::max(worst, std::pow(dist, static_cast<double>(e.multiplicity)));
  }
  return worst;
}

// pinv(S) S for symmetric PSD S, cutting eigenvalues at an absolute level.
inline Matrix psd_pinv_product(const Matrix& s, double cut = 1e-10) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  Vector keep = (es.eigenvalues().array() > cut).cast<double>();
  return es.eigenvectors() * keep.asDiagonal() * es.eigenvectors().transpose();
}

inline double lemma_projector_sum(std::mt19937_64& rng, int n) {
  const Subspace v = Subspace::span(random_matrix(rng, n, uniform_int(rng, 0, n)));
  const Subspace w = Subspace::span(random_matrix(rng, n, uniform_int(rng, 0, n)));
  const Matrix ps = v.projector() + w.projector();
  const Matrix formula = psd_pinv_product(ps);
  const Matrix direct = orth(hstack(v.basis(), w.basis()));
  double worst = (formula - direct * direct.transpose()).norm();
  // Intersection through complements.
  const Matrix pc = v.complement_projector() + w.complement_projector();
  const Matrix perp = psd_pinv_product(pc);
  const Subspace i = intersect(v, w);
  worst = std::max(worst, (perp - i.complement_projector()).norm());
  return worst;
}

}  // namespace liftguard::testing
