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

#include "liftguard/linalg.hpp"

#include <complex>
#include <string>
#include <vector>

namespace liftguard {

// Column space of [B, AB, ..., A^{n-1}B].
Subspace controllable_subspace(const Matrix& a, const Matrix& b, double tol = 1e-10);

struct OutputNullingResult {
  Subspace v;
  std::vector<Eigen::Index> dims;  // dimension after each iteration, starting at n
};

// Largest V with (A + B M) V in V and (C + D M) V = 0 for some M.
OutputNullingResult max_output_nulling_iterates(const Matrix& a, const Matrix& b, const Matrix& c,
                                                const Matrix& d, double tol = 1e-10);
Subspace max_output_nulling(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d,
                            double tol = 1e-10);

struct Friend {
  Matrix m;  // attack_dim x n, zero off the subspace
  Matrix n;  // attack_dim x r, possibly zero columns
  Subspace v;
};

struct FriendResiduals {
  double invariance = 0.0;   // ||P_perp (A + B M) V||
  double nulling = 0.0;      // ||(C + D M) V||
  double kernel = 0.0;       // ||D N||
  double containment = 0.0;  // ||P_perp B N||
  Eigen::Index image_dim = 0;     // dim Im(B N)
  Eigen::Index expected_dim = 0;  // dim(B ker D  intersect  V)
};

// Throws NumericalError when `v` is not output-nulling at tolerance.
Friend compute_friend(const Subspace& v, const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d,
                      const Tolerances& tol = {});
FriendResiduals friend_residuals(const Friend& fr, const Matrix& a, const Matrix& b, const Matrix& c,
                                 const Matrix& d, const Tolerances& tol = {});
// Throws NumericalError when any friend identity fails.
void verify_friend(const Friend& fr, const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d,
                   const Tolerances& tol = {});

struct RestrictedMap {
  Matrix v_star;          // n x r orthonormal
  Matrix a_restricted;    // r x r
  Matrix b_n_restricted;  // r x (cols of N)
};

RestrictedMap restrict_map(const Subspace& v_star, const Friend& fr, const Matrix& a, const Matrix& b,
                           const Tolerances& tol = {});

struct EigStructure {
  std::complex<double> lambda;
  bool is_complex = false;  // conjugate pair represented by Im(lambda) > 0
  int multiplicity = 0;     // algebraic, counted for lambda alone
  int geometric = 0;
  int jordan_size = 0;      // length of the longest chain
  // Real-ified chain: columns g_1..g_s for real lambda, [Re g_1, Im g_1, ...]
  // for complex lambda. Satisfies A G = G J with J from real_jordan_block.
  Matrix chain;
  // Real basis of the generalized eigenspace (both conjugates when complex).
  Matrix generalized_eigenspace;
  bool controllable = false;
  bool unstable = false;
  bool borderline = false;
  bool low_confidence = false;
  std::vector<std::string> warnings;
};

// Sorted by descending |lambda|; complex pairs appear once.
std::vector<EigStructure> eig_structure(const RestrictedMap& map, const Tolerances& tol = {});

// Real Jordan block: s x s for real lambda, 2s x 2s with [[a, b], [-b, a]]
// diagonal blocks for complex lambda = a + ib.
Matrix real_jordan_block(std::complex<double> lambda, int size, bool is_complex);

struct ChainSolutions {
  std::complex<double> lambda;
  bool is_complex = false;
  int jordan_size = 0;
  Eigen::Index rows = 0;  // dimension of V*
  Eigen::Index cols = 0;  // jordan_size or 2 * jordan_size
  Subspace solutions;     // subspace of vec(G), column-major

  Matrix chain(const Vector& vec_g) const;
};

// Solutions G of P (G J - A| G) = 0 with P the projector onto the
// complement of Im B_N.
ChainSolutions eigenspace_assignment_solutions(const RestrictedMap& map, std::complex<double> lambda,
                                               int jordan_size, bool is_complex, const Tolerances& tol = {});

}  // namespace liftguard
