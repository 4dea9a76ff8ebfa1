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

#include <string>
#include <vector>

namespace liftguard {

enum class PlanKind { kernel_direction, nulling_policy, eig_case1, eig_case2, eig_case3 };
enum class GrowthLaw { impulse, geometric, linear };

const char* to_string(PlanKind k);
const char* to_string(GrowthLaw g);
PlanKind plan_kind_from_string(const std::string& s);
GrowthLaw growth_law_from_string(const std::string& s);

struct PlanCertificate {
  double stealth_bound = 0.0;  // predicted max ||y_k||
  GrowthLaw law = GrowthLaw::impulse;
  // geometric: |lambda| per frame; linear: ||z|| slope per frame;
  // impulse: severity reached at onset_frame.
  double rate = 0.0;
  int onset_frame = 0;
  double eta_norm = 0.0;  // ||eta_{i*}||
};

// Replayable attack policy. All plans start from x0 = 0.
struct AttackPlan {
  PlanKind kind = PlanKind::kernel_direction;
  int period = 1;  // prelude length n (state dimension)
  Eigen::Index attack_dim = 0;
  double alpha = 1.0;

  Vector kernel_input;  // kernel_direction: a_0

  Matrix m;       // closed-loop gain (nulling / eigen plans)
  Matrix n_mat;   // nulling_policy: injection map N
  Vector impulse;  // nulling_policy: a-tilde injected at frame 0

  // Unit-target preludes, one per real target column.
  std::vector<std::vector<Vector>> prelude_inputs;
  std::vector<std::vector<Vector>> prelude_states;
  // Coefficient advance per period for case 3 (lambda^n or its real form).
  Matrix rotation;
  Vector target_state;  // alpha-scaled target of the prelude

  PlanCertificate certificate;

  Vector input(int frame, const Vector& state) const;
  InputSource source() const;
  // Copy with the attack scaled by `factor` (alpha for eigen plans).
  AttackPlan scaled(double factor) const;
};

struct SynthOptions {
  double target_severity = 10.0;  // conditions (i) and (ii)
  double stealth_budget = 1e-3;   // condition (iii), per-frame ||y|| during the prelude
  double input_weight = 1e-8;     // relative input penalty in the steering problem
  double ramp_weight = 100.0;     // relative weight of severity-ramp tracking in the prelude
};

AttackPlan synth_condition_i(const DeviationSystem& sys, const Vector& witness, double target_severity,
                             const Tolerances& tol = {});
AttackPlan synth_condition_ii(const DeviationSystem& sys, const Friend& fr, const ConditionIIWitness& witness,
                              double target_severity, const Tolerances& tol = {});
AttackPlan synth_condition_iii(const DeviationSystem& sys, const Friend& fr, const ConditionIIIWitness& witness,
                               const Matrix& v_star, double epsilon_budget, const SynthOptions& options = {},
                               const Tolerances& tol = {});
// Dispatches on the triggered condition; throws for detectable reports.
AttackPlan synthesize(const DeviationSystem& sys, const DetectabilityReport& report, const SynthOptions& options = {});

struct SteeringResult {
  std::vector<Vector> inputs;   // a_0..a_{N-1}
  std::vector<Vector> states;   // x_0..x_{N-1}
  std::vector<Vector> outputs;  // y_0..y_{N-1}
  Vector final_state;
  double steering_error = 0.0;  // relative
};

// Drives x from 0 to `target` in `frames` frames, minimizing output energy
// plus a small input penalty. With ramp_weight > 0 the severity is also
// pulled toward a straight ramp from 0 to E target.
SteeringResult steer(const DeviationSystem& sys, const Vector& target, int frames, double input_weight = 1e-8,
                     double ramp_weight = 0.0);

}  // namespace liftguard
