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

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace liftguard {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// Tolerances shared by the analysis routines. `rank` is relative to the
// largest singular value of whatever matrix is being rank-tested.
struct Tolerances {
  double rank = 1e-10;
  double angle = 1e-7;      // principal-angle threshold for subspace equality
  double residual = 1e-8;   // relative residual for invariant checks
  double eig_cluster = 1e-5;  // relative distance below which eigenvalues merge
  double eig_kernel = 1e-8;   // kernel threshold for (A - lambda I)^k staircases
  double unit_band = 1e-9;    // half width of the |lambda| = 1 borderline band
};

// Rank tolerance used when the caller passes a negative value:
// max(rows, cols) * machine epsilon (relative to sigma_max).
double default_rank_tol(Eigen::Index rows, Eigen::Index cols);

// Subspace of R^n stored through an orthonormal basis.
class Subspace {
 public:
  Subspace() = default;
  // `basis` must already have orthonormal columns.
  Subspace(Matrix basis, double tol);

  static Subspace trivial(Eigen::Index ambient);
  static Subspace full(Eigen::Index ambient);
  // Column space of an arbitrary matrix.
  static Subspace span(const Matrix& columns, double tol = -1.0);

  const Matrix& basis() const { return basis_; }
  Eigen::Index dim() const { return basis_.cols(); }
  Eigen::Index ambient_dim() const { return basis_.rows(); }
  double tol() const { return tol_; }
  bool is_trivial() const { return dim() == 0; }
  bool is_full() const { return dim() == ambient_dim(); }

  Matrix projector() const;
  Matrix complement_projector() const;
  Subspace complement() const;
  // Relative distance ||P_perp v|| / ||v||; zero vectors count as contained.
  double distance(const Vector& v) const;
  bool contains(const Vector& v, double rel_tol) const;

 private:
  Matrix basis_ = Matrix(0, 0);
  double tol_ = 0.0;
};

Subspace null_space(const Matrix& mat, double tol = -1.0);
// Kernel with an absolute singular-value threshold.
Subspace null_space_abs(const Matrix& mat, double abs_tol);
Subspace range_space(const Matrix& mat, double tol = -1.0);
// Complex kernel; basis has orthonormal complex columns.
CMatrix complex_null_space_abs(const CMatrix& mat, double abs_tol);

Subspace intersect(const Subspace& v, const Subspace& w, double tol = -1.0);
Subspace sum(const Subspace& v, const Subspace& w, double tol = -1.0);
// Same lattice operations evaluated through the pseudo-inverse of summed
// projectors; kept separate so the two routes can be compared.
Subspace intersect_via_projectors(const Subspace& v, const Subspace& w, double tol = -1.0);
Subspace sum_via_projectors(const Subspace& v, const Subspace& w, double tol = -1.0);

Matrix project(const Subspace& v);
Matrix project_complement(const Subspace& v);

// Principal angles (radians, ascending) between two subspaces; length is
// min(dim v, dim w).
Vector principal_angles(const Subspace& v, const Subspace& w);
// Largest principal angle when dimensions agree, pi/2 otherwise.
double subspace_gap(const Subspace& v, const Subspace& w);
bool same_subspace(const Subspace& v, const Subspace& w, double angle_tol);

Matrix pinv(const Matrix& mat, double tol = -1.0);
double spectral_norm(const Matrix& mat);
double spectral_radius(const Matrix& mat);
int numerical_rank(const Matrix& mat, double tol = -1.0);

// Sorted descending singular values; empty for zero-size input.
Vector singular_values(const Matrix& mat);

Matrix matrix_power(const Matrix& a, int k);

// Concatenation that tolerates zero-size operands.
Matrix hstack(const Matrix& a, const Matrix& b);
Matrix vstack(const Matrix& a, const Matrix& b);

}  // namespace liftguard
