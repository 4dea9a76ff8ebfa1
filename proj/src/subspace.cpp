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

#include "liftguard/subspace.hpp"

#include "liftguard/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace liftguard {

namespace {

Matrix kron(const Matrix& x, const Matrix& y) {
  Matrix k(x.rows() * y.rows(), x.cols() * y.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      k.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
  }
  return k;
}

void check_system(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw DimensionError("A must be square");
  if (b.rows() != n) throw DimensionError("B row count must match A");
  if (c.cols() != n) throw DimensionError("C column count must match A");
  if (d.rows() != c.rows() || d.cols() != b.cols()) {
    throw DimensionError("D must be " + std::to_string(c.rows()) + "x" + std::to_string(b.cols()));
  }
}

CMatrix cpow(const CMatrix& a, int k) {
  CMatrix r = CMatrix::Identity(a.rows(), a.cols());
  for (int i = 0; i < k; ++i) r = r * a;
  return r;
}

struct Cluster {
  std::complex<double> mean;
  int size = 0;
  double gap = std::numeric_limits<double>::infinity();
};

std::vector<Cluster> cluster_eigenvalues(const CVector& ev, double rel) {
  const Eigen::Index k = ev.size();
  std::vector<int> parent(static_cast<std::size_t>(k));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) { return parent[static_cast<std::size_t>(i)] == i ? i : parent[static_cast<std::size_t>(i)] = find(parent[static_cast<std::size_t>(i)]); };
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      const double thr = rel * std::max(1.0, std::max(std::abs(ev(i)), std::abs(ev(j))));
      if (std::abs(ev(i) - ev(j)) <= thr) parent[static_cast<std::size_t>(find(static_cast<int>(i)))] = find(static_cast<int>(j));
    }
  }
  std::vector<Cluster> out;
  std::vector<int> root_slot(static_cast<std::size_t>(k), -1);
  for (Eigen::Index i = 0; i < k; ++i) {
    const int r = find(static_cast<int>(i));
    if (root_slot[static_cast<std::size_t>(r)] < 0) {
      root_slot[static_cast<std::size_t>(r)] = static_cast<int>(out.size());
      out.push_back({});
    }
    Cluster& c = out[static_cast<std::size_t>(root_slot[static_cast<std::size_t>(r)])];
    c.mean += ev(i);
    c.size += 1;
  }
  for (auto& c : out) c.mean /= static_cast<double>(c.size);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (i != j) out[i].gap = std::min(out[i].gap, std::abs(out[i].mean - out[j].mean));
    }
  }
  return out;
}

}  // namespace

Subspace controllable_subspace(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != a.cols() || b.rows() != a.rows()) throw DimensionError("controllable_subspace: shape mismatch");
  const Eigen::Index n = a.rows();
  Subspace k = range_space(b, tol);
  for (Eigen::Index it = 0; it < n && !k.is_full() && !k.is_trivial(); ++it) {
    Subspace next = range_space(hstack(b, a * k.basis()), tol);
    const bool done = next.dim() == k.dim();
    k = std::move(next);
    if (done) break;
  }
  return k;
}

OutputNullingResult max_output_nulling_iterates(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d,
                                                double tol) {
  check_system(a, b, c, d);
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  OutputNullingResult res;
  res.v = Subspace::full(n);
  res.dims.push_back(n);
  for (Eigen::Index it = 0; it <= n; ++it) {
    if (res.v.is_trivial()) break;
    const Matrix wp = res.v.complement().basis();
    Matrix top(wp.cols(), n + m);
    top << wp.transpose() * a, wp.transpose() * b;
    Matrix bottom(c.rows(), n + m);
    bottom << c, d;
    const Subspace ker = null_space(vstack(top, bottom), tol);
    Subspace next = range_space(ker.basis().topRows(n), tol);
    const bool done = next.dim() == res.v.dim();
    res.v = std::move(next);
    res.dims.push_back(res.v.dim());
    if (done) break;
  }
  return res;
}

Subspace max_output_nulling(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d, double tol) {
  return max_output_nulling_iterates(a, b, c, d, tol).v;
}

Friend compute_friend(const Subspace& v, const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d,
                      const Tolerances& tol) {
  check_system(a, b, c, d);
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.cols();
  if (v.ambient_dim() != n) throw DimensionError("compute_friend: subspace lives in the wrong space");
  Friend fr;
  fr.v = v;
  const Matrix& vb = v.basis();
  const Matrix wp = v.complement().basis();

  fr.m = Matrix::Zero(m, n);
  if (v.dim() > 0) {
    const Matrix lhs = vstack(wp.transpose() * b, d);
    const Matrix rhs = -vstack(wp.transpose() * a * vb, c * vb);
    const Matrix u = pinv(lhs, tol.rank) * rhs;
    const double scale = std::max({1.0, spectral_norm(a), spectral_norm(c)}) * std::max(1.0, spectral_norm(u));
    const double resid = (lhs * u - rhs).norm();
    if (resid > tol.residual * scale) {
      std::ostringstream os;
      os << "not an output-nulling subspace: friend residual " << resid;
      throw NumericalError(os.str());
    }
    fr.m = u * vb.transpose();
  }

  const Subspace z = null_space(d, tol.rank);
  Matrix n0 = z.basis();
  if (wp.cols() > 0 && z.dim() > 0) n0 = z.basis() * null_space_abs(wp.transpose() * b * z.basis(), tol.rank * std::max(1.0, spectral_norm(b))).basis();
  // Greedy index-order selection of columns whose images under B are independent.
  const double thr = 1e-9 * std::max(1.0, spectral_norm(b));
  Matrix q(n, 0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < n0.cols(); ++j) {
    Vector img = b * n0.col(j);
    if (q.cols() > 0) img -= q * (q.transpose() * img);
    if (img.norm() > thr) {
      q = hstack(q, img.normalized());
      keep.push_back(j);
    }
  }
  fr.n = Matrix(m, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) fr.n.col(static_cast<Eigen::Index>(j)) = n0.col(keep[j]);
  verify_friend(fr, a, b, c, d, tol);
  return fr;
}

FriendResiduals friend_residuals(const Friend& fr, const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d,
                                 const Tolerances& tol) {
  FriendResiduals r;
  const Matrix& vb = fr.v.basis();
  const Matrix pp = fr.v.complement_projector();
  if (vb.cols() > 0) {
    r.invariance = spectral_norm(pp * (a + b * fr.m) * vb);
    r.nulling = spectral_norm((c + d * fr.m) * vb);
  }
  if (fr.n.cols() > 0) {
    r.kernel = spectral_norm(d * fr.n);
    r.containment = spectral_norm(pp * b * fr.n);
    r.image_dim = numerical_rank(b * fr.n, 1e-9);
  }
  const Subspace bkd = range_space(b * null_space(d, tol.rank).basis(), 1e-9);
  r.expected_dim = intersect(bkd, fr.v, tol.rank).dim();
  return r;
}

void verify_friend(const Friend& fr, const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d,
                   const Tolerances& tol) {
  const FriendResiduals r = friend_residuals(fr, a, b, c, d, tol);
  const double mnorm = std::max(1.0, spectral_norm(fr.m));
  const double s1 = std::max(1.0, spectral_norm(a) + spectral_norm(b) * mnorm);
  const double s2 = std::max(1.0, spectral_norm(c) + spectral_norm(d) * mnorm);
  const double s3 = std::max(1.0, std::max(spectral_norm(b), spectral_norm(d)));
  std::ostringstream os;
  if (r.invariance > tol.residual * s1) os << "(A+BM)V leaves V by " << r.invariance << "; ";
  if (r.nulling > tol.residual * s2) os << "(C+DM)V nonzero (" << r.nulling << "); ";
  if (r.kernel > tol.residual * s3) os << "DN nonzero (" << r.kernel << "); ";
  if (r.containment > tol.residual * s3) os << "BN leaves V by " << r.containment << "; ";
  if (r.image_dim != r.expected_dim) os << "dim Im(BN) = " << r.image_dim << " but dim(B ker D ∩ V) = " << r.expected_dim;
  if (!os.str().empty()) throw NumericalError("friend check failed: " + os.str());
}

RestrictedMap restrict_map(const Subspace& v_star, const Friend& fr, const Matrix& a, const Matrix& b,
                           const Tolerances& tol) {
  RestrictedMap map;
  map.v_star = v_star.basis();
  const Matrix am = a + b * fr.m;
  map.a_restricted = map.v_star.transpose() * am * map.v_star;
  map.b_n_restricted = map.v_star.transpose() * b * fr.n;
  if (map.v_star.cols() > 0) {
    const double scale = std::max(1.0, spectral_norm(am));
    const double inv = spectral_norm(am * map.v_star - map.v_star * map.a_restricted);
    const double bn = fr.n.cols() > 0 ? spectral_norm(b * fr.n - map.v_star * map.b_n_restricted) : 0.0;
    if (inv > tol.residual * scale || bn > tol.residual * std::max(1.0, spectral_norm(b))) {
      std::ostringstream os;
      os << "restricted map: subspace not invariant (residual " << inv << ", B N residual " << bn << ")";
      throw NumericalError(os.str());
    }
  }
  return map;
}

Matrix real_jordan_block(std::complex<double> lambda, int size, bool is_complex) {
  if (!is_complex) {
    Matrix j = lambda.real() * Matrix::Identity(size, size);
    for (int i = 0; i + 1 < size; ++i) j(i, i + 1) = 1.0;
    return j;
  }
  Matrix j = Matrix::Zero(2 * size, 2 * size);
  Matrix blk(2, 2);
  blk << lambda.real(), lambda.imag(), -lambda.imag(), lambda.real();
  for (int i = 0; i < size; ++i) {
    j.block(2 * i, 2 * i, 2, 2) = blk;
    if (i + 1 < size) j.block(2 * i, 2 * i + 2, 2, 2) = Matrix::Identity(2, 2);
  }
  return j;
}

std::vector<EigStructure> eig_structure(const RestrictedMap& map, const Tolerances& tol) {
  const Matrix& a = map.a_restricted;
  const Eigen::Index r = a.rows();
  std::vector<EigStructure> out;
  if (r == 0) return out;
  Eigen::EigenSolver<Matrix> es(a, false);
  const CVector ev = es.eigenvalues();
  auto clusters = cluster_eigenvalues(ev, tol.eig_cluster);
  std::sort(clusters.begin(), clusters.end(), [](const Cluster& x, const Cluster& y) {
    if (std::abs(x.mean) != std::abs(y.mean)) return std::abs(x.mean) > std::abs(y.mean);
    return x.mean.imag() > y.mean.imag();
  });
  const CMatrix ac = a.cast<std::complex<double>>();
  const CMatrix bc = map.b_n_restricted.cast<std::complex<double>>();

  for (const auto& cl : clusters) {
    const double cthr = tol.eig_cluster * std::max(1.0, std::abs(cl.mean));
    if (cl.mean.imag() < -cthr) continue;
    EigStructure e;
    e.is_complex = cl.mean.imag() > cthr;
    e.lambda = e.is_complex ? cl.mean : std::complex<double>(cl.mean.real(), 0.0);
    e.multiplicity = cl.size;
    if (cl.gap < 10.0 * cthr) {
      e.low_confidence = true;
      e.warnings.push_back("clustered eigenvalues: gap below 10x cluster tolerance");
    }

    const CMatrix ak = ac - e.lambda * CMatrix::Identity(r, r);
    const double akn = std::max(1.0, ak.operatorNorm());
    std::vector<CMatrix> kers;  // kers[j-1] = ker (A - lambda I)^j
    for (int j = 1; j <= e.multiplicity; ++j) {
      kers.push_back(complex_null_space_abs(cpow(ak, j), tol.eig_kernel * std::pow(akn, j)));
      if (kers.back().cols() == e.multiplicity) break;
      if (j > 1 && kers.back().cols() == kers[kers.size() - 2].cols()) break;
    }
    e.geometric = static_cast<int>(kers.front().cols());
    e.jordan_size = static_cast<int>(kers.size());
    if (kers.size() > 1 && kers.back().cols() == kers[kers.size() - 2].cols()) --e.jordan_size;
    const CMatrix& top = kers[static_cast<std::size_t>(e.jordan_size - 1)];
    if (top.cols() != e.multiplicity) {
      e.low_confidence = true;
      e.warnings.push_back("kernel staircase dimension differs from algebraic multiplicity");
    }
    if (e.jordan_size > 4) e.warnings.push_back("Jordan chain longer than 4: conditioning may be poor");
    if (e.geometric == 0) {
      e.low_confidence = true;
      e.warnings.push_back("no eigenvector found at kernel tolerance");
      continue;
    }

    // Top of the chain: the basis vector of the last kernel furthest from the previous one.
    CVector v = top.col(0);
    if (e.jordan_size > 1) {
      const CMatrix& prev = kers[static_cast<std::size_t>(e.jordan_size - 2)];
      double best = -1.0;
      for (Eigen::Index k = 0; k < top.cols(); ++k) {
        CVector res = top.col(k) - prev * (prev.adjoint() * top.col(k));
        if (res.norm() > best) {
          best = res.norm();
          v = res.normalized();
        }
      }
    }
    const int s = e.jordan_size;
    std::vector<CVector> chain(static_cast<std::size_t>(s));
    chain[static_cast<std::size_t>(s - 1)] = v;
    for (int j = s - 2; j >= 0; --j) chain[static_cast<std::size_t>(j)] = ak * chain[static_cast<std::size_t>(j + 1)];
    if (e.is_complex) {
      e.chain = Matrix(r, 2 * s);
      for (int j = 0; j < s; ++j) {
        e.chain.col(2 * j) = chain[static_cast<std::size_t>(j)].real();
        e.chain.col(2 * j + 1) = chain[static_cast<std::size_t>(j)].imag();
      }
      e.generalized_eigenspace = range_space(hstack(top.real(), top.imag()), 1e-9).basis();
    } else {
      e.chain = Matrix(r, s);
      for (int j = 0; j < s; ++j) e.chain.col(j) = chain[static_cast<std::size_t>(j)].real();
      e.generalized_eigenspace = range_space(hstack(top.real(), top.imag()), 1e-9).basis();
    }

    if (bc.cols() == 0) {
      e.controllable = false;
    } else {
      CMatrix pbh(r, r + bc.cols());
      pbh << ak, bc;
      const Eigen::VectorXd sv = Eigen::JacobiSVD<CMatrix>(pbh).singularValues();
      int rank = 0;
      for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > tol.eig_kernel * std::max(1.0, sv(0))) ++rank;
      }
      e.controllable = rank == r;
    }
    const double mag = std::abs(e.lambda);
    e.unstable = mag >= 1.0 - tol.unit_band;
    e.borderline = std::abs(mag - 1.0) <= tol.unit_band;
    out.push_back(std::move(e));
  }
  return out;
}

Matrix ChainSolutions::chain(const Vector& vec_g) const {
  return Eigen::Map<const Matrix>(vec_g.data(), rows, cols);
}

ChainSolutions eigenspace_assignment_solutions(const RestrictedMap& map, std::complex<double> lambda, int jordan_size,
                                               bool is_complex, const Tolerances& tol) {
  if (jordan_size < 1) throw DimensionError("jordan_size must be at least 1");
  const Matrix& a = map.a_restricted;
  const Eigen::Index r = a.rows();
  ChainSolutions sol;
  sol.lambda = lambda;
  sol.is_complex = is_complex;
  sol.jordan_size = jordan_size;
  sol.rows = r;
  sol.cols = is_complex ? 2 * jordan_size : jordan_size;
  const Matrix j = real_jordan_block(lambda, jordan_size, is_complex);
  Matrix p = Matrix::Identity(r, r);
  if (map.b_n_restricted.cols() > 0) p -= map.b_n_restricted * pinv(map.b_n_restricted, tol.rank);
  const Matrix l = kron(j.transpose(), p) - kron(Matrix::Identity(sol.cols, sol.cols), p * a);
  const double scale = std::max(1.0, spectral_norm(a) + std::abs(lambda));
  sol.solutions = null_space_abs(l, tol.eig_kernel * scale);
  return sol;
}

}  // namespace liftguard
