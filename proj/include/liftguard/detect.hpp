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

#include "liftguard/model.hpp"
#include "liftguard/subspace.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace liftguard {

enum class Verdict { detectable, vulnerable };
enum class Condition { none, i, ii, iii };

const char* to_string(Verdict v);
const char* to_string(Condition c);

// Nonzero column of [H A_M^{n-1} B N, ..., H B N, F N], H = E + F M.
struct ConditionIIWitness {
  int block = 0;   // 0..n, left to right
  int column = 0;  // column of N
  Vector value;    // the L column
  // Frame at which an impulse in the N-th channel at frame 0 shows up in z.
  int severity_frame() const;
  int state_dim = 0;
};

struct ConditionIIIWitness {
  std::complex<double> lambda;
  bool is_complex = false;
  int jordan_size = 0;
  Matrix chain;   // G in V* coordinates, real-ified
  Matrix j_block;  // matching real Jordan block
  Matrix gain;    // K with (A| + B_N K) G = G J; zero columns when N is empty
  Matrix m_with_gain;  // M + N K V*^T
  Matrix eta;     // (E + F M) V* G
  int i_star = 0;  // first chain position (0-based) escaping ker (E + F M) V*
  double closed_loop_residual = 0.0;
  bool low_confidence = false;
};

struct ConditionIIIResult {
  std::optional<ConditionIIIWitness> witness;
  Subspace controllable;
  Subspace v_star;
  RestrictedMap map;
  std::vector<EigStructure> eigs;
  std::vector<std::string> flags;
};

struct DetectabilityReport {
  std::string mode;
  Verdict verdict = Verdict::detectable;
  Condition condition = Condition::none;
  std::optional<Vector> witness_i;
  std::optional<ConditionIIWitness> witness_ii;
  std::optional<ConditionIIIWitness> witness_iii;
  Friend friend_used;
  Subspace v;
  Subspace controllable;
  Subspace v_star;
  RestrictedMap map;
  std::vector<EigStructure> eigs;
  std::vector<std::string> flags;
  Tolerances tol;

  bool vulnerable() const { return verdict == Verdict::vulnerable; }
};

std::optional<Vector> check_condition_i(const DeviationSystem& sys, const Tolerances& tol = {});
std::optional<ConditionIIWitness> check_condition_ii(const DeviationSystem& sys, const Friend& fr,
                                                     const Tolerances& tol = {});
ConditionIIIResult check_condition_iii(const DeviationSystem& sys, const Friend& fr, const Tolerances& tol = {});

std::optional<Vector> check_condition_i(const LiftedPlant& plant, const std::string& mode, const Tolerances& tol = {});
std::optional<ConditionIIWitness> check_condition_ii(const LiftedPlant& plant, const std::string& mode,
                                                     const Friend& fr, const Tolerances& tol = {});
ConditionIIIResult check_condition_iii(const LiftedPlant& plant, const std::string& mode, const Friend& fr,
                                       const Tolerances& tol = {});

// `friend_override` replaces the computed friend (it is verified first).
DetectabilityReport analyze_detectability(const DeviationSystem& sys, const Tolerances& tol = {},
                                          const Friend* friend_override = nullptr, const std::string& mode = "");
DetectabilityReport analyze_detectability(const LiftedPlant& plant, const std::string& mode,
                                          const Tolerances& tol = {});

// Time-domain over-approximation of the worst severity reachable while
// ||y_k|| <= eps for all k, for a detectable mode. Linear in eps.
struct SeverityBound {
  double sigma_plus = 0.0;   // smallest nonzero singular value of P_perp O_n
  double eps1_gain = 0.0;    // ||P_perp_V x|| <= eps1_gain * eps
  double eps2_gain = 0.0;    // ||P_perp_{V*} x|| <= eps2_gain * eps
  double stack_gain = 0.0;   // bound on the stacked Delta-a image, per eps
  double kappa_b = 0.0;
  double kappa_f = 0.0;
  double am_norm = 0.0;      // ||A + B M||
  double hm_norm = 0.0;      // ||E + F M||
  double stable_sum = 0.0;   // sum_i ||H (A| P_s)^i||
  double gain = 0.0;         // delta_bar(eps) = gain * eps
  Matrix stabilizing_gain;   // K used on the controllable part of (A|, B_N)
  std::vector<std::string> flags;

  double operator()(double eps) const { return gain * eps; }
};

SeverityBound severity_bound(const DeviationSystem& sys, const DetectabilityReport& report,
                             const Tolerances& tol = {});

struct ImpulseSum {
  double truncated = 0.0;  // sum_{k=0}^{H} ||R_k||
  double tail = 0.0;       // bound on sum_{k>H} ||R_k||
  int horizon = 0;
  double contraction = 0.0;  // ||A^L|| used by the tail bound
  int contraction_steps = 0;
};

// R_0 = D, R_k = C A^{k-1} B. Throws ThresholdError when rho(A) >= 1.
ImpulseSum impulse_norm_sum(const Matrix& a, const Matrix& c, const Matrix& b, const Matrix& d, int horizon,
                            double contraction = 0.5);

struct ThresholdOptions {
  int horizon = 200;
  double margin = 0.05;
  double floor = 1e-9;
  double noise_bound = 1.0;  // ||w_k|| <= noise_bound for every lifted block
};

struct Thresholds {
  double epsilon = 0.0;
  double delta_noise = 0.0;   // delta tilde
  double delta_attack = 0.0;  // delta bar at 2 epsilon
  double delta = 0.0;
  int truncation_horizon = 0;
  double tail_bound = 0.0;     // y-channel tail
  double tail_bound_z = 0.0;
  double noise_gain_y = 0.0;   // truncated sum of ||R^{yw}_k||
  double noise_gain_z = 0.0;
  SeverityBound severity;
  ThresholdOptions options;
};

Thresholds compute_thresholds(const DeviationSystem& sys, const DetectabilityReport& report,
                              const ThresholdOptions& options = {}, const Tolerances& tol = {});
Thresholds compute_thresholds(const LiftedPlant& plant, const std::string& mode,
                              const ThresholdOptions& options = {}, const Tolerances& tol = {});

std::optional<int> alarm(const SimulationTrace& trace, double epsilon);
std::optional<int> alarm(const std::vector<double>& output_norms, double epsilon);

// Stabilizing gain for the controllable part of (a, b) via a Riccati
// iteration; zero on the uncontrollable part.
Matrix stabilize_controllable_part(const Matrix& a, const Matrix& b, const Tolerances& tol = {});

}  // namespace liftguard
