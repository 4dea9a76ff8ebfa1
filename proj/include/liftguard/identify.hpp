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

#include "liftguard/detect.hpp"
#include "liftguard/model.hpp"
#include "liftguard/subspace.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace liftguard {

// Two copies of the plant driven by modes p and q. Output is y^p - y^q,
// severity stacks z^p and z^q.
struct AugmentedPair {
  std::string p;
  std::string q;
  DeviationSystem sys;
  Subspace v_pq;
  Eigen::Index single_dim = 0;
  Eigen::Index attack_dim_p = 0;
};

AugmentedPair build_augmented(const DeviationSystem& sp, const DeviationSystem& sq, const std::string& p,
                              const std::string& q, const Tolerances& tol = {});
AugmentedPair build_augmented(const LiftedPlant& plant, const std::string& p, const std::string& q,
                              const Tolerances& tol = {});

// zero: both copies start at the nominal state and the pair is discernible
// iff the augmented deviation system is detectable.
// free: arbitrary initial pair states (kernel and friend conditions on V_pq).
enum class InitialState { zero, free };

const char* to_string(InitialState s);
InitialState initial_state_from_string(const std::string& s);

struct DiscernibilityVerdict {
  std::string p, q;
  InitialState convention = InitialState::zero;
  bool discernible = true;
  std::string failed;  // condition that failed under the chosen convention
  Vector witness;

  // Both conventions are always evaluated.
  bool zero_state_discernible = true;
  std::string zero_state_failed;
  bool free_state_discernible = true;
  std::string free_state_failed;  // "i", "ii-FN" or "ii-EV"
  Vector free_state_witness;      // input direction (i, ii-FN) or pair state (ii-EV)
  DetectabilityReport zero_state_report;
  Friend pair_friend;
};

DiscernibilityVerdict check_discernibility(const AugmentedPair& pair, InitialState convention = InitialState::zero,
                                           const Tolerances& tol = {});

struct IdentifiabilityResult {
  std::vector<std::string> modes;
  std::vector<DiscernibilityVerdict> pairs;
  bool identifiable = true;
  InitialState convention = InitialState::zero;
};

IdentifiabilityResult check_identifiable(const LiftedPlant& plant, const std::vector<std::string>& modes,
                                         InitialState convention = InitialState::zero, const Tolerances& tol = {});

// Initial pair state and input sequence realizing a free-state
// indiscernibility witness: y^p - y^q == 0 while ||z^{pq}_0|| = target.
struct IndiscernibleRun {
  Vector x0;
  std::vector<Vector> inputs;  // a^{pq}_k, k = 0..frames-1
};
IndiscernibleRun free_state_witness_run(const AugmentedPair& pair, const DiscernibilityVerdict& verdict,
                                        double target_severity, int frames);

struct ModeResidual {
  std::string mode;
  Matrix o;            // window observability block
  Matrix g;            // window attack-propagation block
  Matrix range_basis;  // orthonormal basis of Im [O G]
  double epsilon = 0.0;
};

struct ResidualBank {
  std::vector<ModeResidual> modes;
  int window = 0;
  Eigen::Index output_dim = 0;

  int index(const std::string& mode) const;
  // ||P_perp Y|| for a stacked window.
  double residual(std::size_t mode, const Vector& stacked) const;
};

// window <= 0 selects n + 2 frames.
ResidualBank build_residual_bank(const LiftedPlant& plant, const std::vector<std::string>& modes,
                                 const std::map<std::string, double>& thresholds, int window = 0,
                                 const Tolerances& tol = {});

struct IdentificationStep {
  int frame = 0;
  std::vector<double> residuals;
  std::vector<bool> membership;  // estimate after processing this window
};

struct IdentificationHistory {
  std::vector<std::string> modes;
  std::vector<IdentificationStep> steps;
  std::vector<bool> final_set;
  std::optional<int> unmodeled_attack_frame;  // first frame at which the estimate became empty
  std::optional<int> collapse_frame;          // first frame with a single mode left

  std::vector<std::string> final_modes() const;
};

IdentificationHistory run_identification(const ResidualBank& bank, const SimulationTrace& trace, int alarm_frame);

// Noise-only residual bound with the window noise map G^w:
// floor + (1 + margin) * noise_bound * min(||P_perp G^w|| sqrt(L), sum_j ||P_perp G^w_j||).
std::map<std::string, double> calibrate_identification_thresholds(const LiftedPlant& plant,
                                                                  const std::vector<std::string>& modes,
                                                                  double noise_bound, int window = 0,
                                                                  double margin = 0.05, double floor = 1e-9,
                                                                  const Tolerances& tol = {});

void write_identification_csv(std::ostream& os, const IdentificationHistory& history);

}  // namespace liftguard
