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

#include "liftguard/linalg.hpp"

#include "liftguard/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace liftguard {

namespace {

void require_same_ambient(const Subspace& v, const Subspace& w, const char* op) {
  if (v.ambient_dim() != w.ambient_dim()) {
    throw DimensionError(std::string(op) + ": ambient dimensions differ (" +
                         std::to_string(v.ambient_dim()) + " vs " +
                         std::to_string(w.ambient_dim()) + ")");
  }
}

double resolve_tol(double tol, Eigen::Index rows, Eigen::Index cols) {
  return tol < 0.0 ? default_rank_tol(rows, cols) : tol;
}

int rank_from_singular_values(const Vector& s, double threshold) {
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++r;
  }
  return r;
}

}  // namespace

double default_rank_tol(Eigen::Index rows, Eigen::Index cols) {
  return static_cast<double>(std::max<Eigen::Index>({rows, cols, 1})) *
         std::numeric_limits<double>::epsilon();
}

Subspace::Subspace(Matrix basis, double tol) : basis_(std::move(basis)), tol_(tol) {}

Subspace Subspace::trivial(Eigen::Index ambient) { return Subspace(Matrix(ambient, 0), 0.0); }

Subspace Subspace::full(Eigen::Index ambient) {
  return Subspace(Matrix::Identity(ambient, ambient), 0.0);
}

Subspace Subspace::span(const Matrix& columns, double tol) { return range_space(columns, tol); }

Matrix Subspace::projector() const { return basis_ * basis_.transpose(); }

Matrix Subspace::complement_projector() const {
  return Matrix::Identity(ambient_dim(), ambient_dim()) - projector();
}

Subspace Subspace::complement() const {
  const Eigen::Index n = ambient_dim();
  if (dim() == 0) return full(n);
  if (dim() == n) return trivial(n);
  Eigen::JacobiSVD<Matrix> svd(basis_, Eigen::ComputeFullU);
  return Subspace(svd.matrixU().rightCols(n - dim()), tol_);
}

double Subspace::distance(const Vector& v) const {
  const double nv = v.norm();
  if (nv == 0.0) return 0.0;
  Vector r = v - basis_ * (basis_.transpose() * v);
  return r.norm() / nv;
}

bool Subspace::contains(const Vector& v, double rel_tol) const { return distance(v) <= rel_tol; }

Vector singular_values(const Matrix& mat) {
  if (mat.size() == 0) return Vector(0);
  Eigen::BDCSVD<Matrix> svd(mat);
  return svd.singularValues();
}

Subspace null_space(const Matrix& mat, double tol) {
  const Eigen::Index cols = mat.cols();
  if (mat.rows() == 0 || cols == 0) return Subspace::full(cols);
  tol = resolve_tol(tol, mat.rows(), cols);
  Eigen::BDCSVD<Matrix> svd(mat, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const int r = rank_from_singular_values(s, tol * s(0));
  return Subspace(svd.matrixV().rightCols(cols - r), tol);
}

Subspace null_space_abs(const Matrix& mat, double abs_tol) {
  const Eigen::Index cols = mat.cols();
  if (mat.rows() == 0 || cols == 0) return Subspace::full(cols);
  Eigen::BDCSVD<Matrix> svd(mat, Eigen::ComputeFullV);
  const int r = rank_from_singular_values(svd.singularValues(), abs_tol);
  return Subspace(svd.matrixV().rightCols(cols - r), abs_tol);
}

CMatrix complex_null_space_abs(const CMatrix& mat, double abs_tol) {
  const Eigen::Index cols = mat.cols();
  if (mat.rows() == 0 || cols == 0) return CMatrix::Identity(cols, cols);
  Eigen::JacobiSVD<CMatrix> svd(mat, Eigen::ComputeFullV);
  const Eigen::VectorXd s = svd.singularValues();
  const int r = rank_from_singular_values(s, abs_tol);
  return svd.matrixV().rightCols(cols - r);
}

Subspace range_space(const Matrix& mat, double tol) {
  const Eigen::Index rows = mat.rows();
  if (rows == 0 || mat.cols() == 0) return Subspace::trivial(rows);
  tol = resolve_tol(tol, rows, mat.cols());
  Eigen::BDCSVD<Matrix> svd(mat, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  const int r = rank_from_singular_values(s, tol * s(0));
  return Subspace(svd.matrixU().leftCols(r), tol);
}

Subspace intersect(const Subspace& v, const Subspace& w, double tol) {
  require_same_ambient(v, w, "intersect");
  const Eigen::Index n = v.ambient_dim();
  if (v.is_trivial() || w.is_trivial()) return Subspace::trivial(n);
  if (w.is_full()) return v;
  if (v.is_full()) return w;
  // x = V c with x in W  <=>  W_perp^T V c = 0.
  const Matrix wp = w.complement().basis();
  // Entries are sines of principal angles, so the cut is absolute.
  const Subspace c = null_space_abs(wp.transpose() * v.basis(), tol < 0.0 ? 1e-10 : tol);
  return Subspace(v.basis() * c.basis(), c.tol());
}

Subspace sum(const Subspace& v, const Subspace& w, double tol) {
  require_same_ambient(v, w, "sum");
  return range_space(hstack(v.basis(), w.basis()), tol);
}

namespace {

// Eigenvectors of a projector sum (eigenvalues in [0, 2]) on one side of an
// absolute threshold.
Subspace psd_split(const Matrix& s, double tol, bool above) {
  const Eigen::Index n = s.rows();
  if (n == 0) return Subspace::trivial(0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (s + s.transpose()));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((es.eigenvalues()(i) > tol) == above) keep.push_back(i);
  }
  Matrix b(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) b.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]);
  return Subspace(b, tol);
}

}  // namespace

// Range of P_V' + P_W' is (V cap W)'; its kernel is the intersection.
Subspace intersect_via_projectors(const Subspace& v, const Subspace& w, double tol) {
  require_same_ambient(v, w, "intersect");
  if (tol < 0.0) tol = 1e-10;  // formed projectors carry O(eps) noise
  return psd_split(v.complement_projector() + w.complement_projector(), tol, false);
}

Subspace sum_via_projectors(const Subspace& v, const Subspace& w, double tol) {
  require_same_ambient(v, w, "sum");
  if (tol < 0.0) tol = 1e-10;
  return psd_split(v.projector() + w.projector(), tol, true);
}

Matrix project(const Subspace& v) { return v.projector(); }

Matrix project_complement(const Subspace& v) { return v.complement_projector(); }

Vector principal_angles(const Subspace& v, const Subspace& w) {
  require_same_ambient(v, w, "principal_angles");
  const Eigen::Index k = std::min(v.dim(), w.dim());
  if (k == 0) return Vector(0);
  Vector s = singular_values(v.basis().transpose() * w.basis());
  Vector angles(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    angles(k - 1 - i) = std::acos(std::clamp(s(i), -1.0, 1.0));
  }
  // acos is inaccurate near zero; refine small angles through the sine form.
  const Subspace& small = v.dim() <= w.dim() ? v : w;
  const Subspace& big = v.dim() <= w.dim() ? w : v;
  Vector sines = singular_values(small.basis() - big.projector() * small.basis());
  std::sort(sines.data(), sines.data() + sines.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    if (angles(i) < 0.1) angles(i) = std::asin(std::clamp(sines(i), 0.0, 1.0));
  }
  std::sort(angles.data(), angles.data() + angles.size());
  return angles;
}

double subspace_gap(const Subspace& v, const Subspace& w) {
  require_same_ambient(v, w, "subspace_gap");
  if (v.dim() != w.dim()) return M_PI / 2.0;
  if (v.dim() == 0) return 0.0;
  const Matrix r = w.basis() - v.projector() * w.basis();
  return std::asin(std::clamp(spectral_norm(r), 0.0, 1.0));
}

bool same_subspace(const Subspace& v, const Subspace& w, double angle_tol) {
  return subspace_gap(v, w) <= angle_tol;
}

Matrix pinv(const Matrix& mat, double tol) {
  if (mat.size() == 0) return Matrix::Zero(mat.cols(), mat.rows());
  tol = resolve_tol(tol, mat.rows(), mat.cols());
  Eigen::BDCSVD<Matrix> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double thr = tol * s(0);
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > thr) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double spectral_norm(const Matrix& mat) {
  if (mat.size() == 0) return 0.0;
  return singular_values(mat)(0);
}

double spectral_radius(const Matrix& mat) {
  if (mat.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(mat, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

int numerical_rank(const Matrix& mat, double tol) {
  if (mat.size() == 0) return 0;
  tol = resolve_tol(tol, mat.rows(), mat.cols());
  const Vector s = singular_values(mat);
  return rank_from_singular_values(s, tol * s(0));
}

Matrix matrix_power(const Matrix& a, int k) {
  Matrix r = Matrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) r = r * a;
  return r;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  if (a.cols() == 0) return b.rows() == a.rows() || a.rows() == 0 ? b : Matrix(a.rows(), 0);
  if (b.cols() == 0) return a;
  if (a.rows() != b.rows()) throw DimensionError("hstack: row counts differ");
  Matrix r(a.rows(), a.cols() + b.cols());
  r << a, b;
  return r;
}

Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0) return b.cols() == a.cols() || a.cols() == 0 ? b : Matrix(0, a.cols());
  if (b.rows() == 0) return a;
  if (a.cols() != b.cols()) throw DimensionError("vstack: column counts differ");
  Matrix r(a.rows() + b.rows(), a.cols());
  r << a, b;
  return r;
}

}  // namespace liftguard
