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
#include "liftguard/identify.hpp"
#include "liftguard/kernels.hpp"
#include "liftguard/model.hpp"
#include "liftguard/synth.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace liftguard {

// Planar UAS navigation loop: kinematics, guidance gain K_o and observer L_o.
// Modes: "gps" spoofs both GPS position channels, "1" north only, "2" east only.
struct UasScenario {
  double dt = 0.1;
  Matrix a_o, b_o, l_o, c_o, k_o;
  NominalModel model;              // sensors "onboard" (GPS + observer) and "offboard" (radar position)
  SensorSchedule per_step;         // T = 1, off-board sensor unused
  SensorSchedule lifted_schedule;  // T = 5, off-board sample at offset 0
  LiftedPlant step_plant;
  LiftedPlant lifted_plant;
};

UasScenario uas_scenario();

struct TrendFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
TrendFit fit_trend(const std::vector<double>& values, int first = 0);

struct VulnerabilityExperiment {
  DetectabilityReport report;
  AttackPlan plan;
  SimulationTrace trace;
  SimulationTrace disengaged;  // attack switched off at disengage_step
  int disengage_step = 0;
  TrendFit severity_trend;
  double max_output = 0.0;
};

VulnerabilityExperiment experiment_vulnerability(const UasScenario& s, int steps = 500, double budget = 0.5e-3);

struct DetectionExperiment {
  DetectabilityReport report;
  Thresholds thresholds;
  std::vector<kernels::NoiseRun> noise_runs;
  int false_alarms = 0;
  SimulationTrace attack_trace;
  double attack_scale = 0.0;
  int disengage_frame = 0;
  std::optional<int> alarm_frame;
  std::optional<int> severity_cross_frame;  // first frame with ||z|| >= delta
};

DetectionExperiment experiment_detection(const UasScenario& s, std::uint64_t seed = 7, int runs = 100,
                                         int frames = 200);

struct IdentificationExperiment {
  std::string true_mode;
  bool attacked = true;
  IdentifiabilityResult identifiability;
  std::map<std::string, double> epsilon;
  Thresholds detection;
  SimulationTrace trace;
  std::optional<int> alarm_frame;
  std::optional<int> onset_frame;            // first frame with ||z|| >= delta of the true mode
  std::optional<int> first_exceed_other;     // first window start with another mode over threshold
  IdentificationHistory history;
  // Smallest severity at which the estimate collapsed over a scale sweep.
  // Empirical, not a certified bound.
  std::optional<double> delta_q_estimate;
};

IdentificationExperiment experiment_identification(const UasScenario& s, const std::string& true_mode = "1",
                                                   bool attack = true, std::uint64_t seed = 7, int frames = 120);

// Per-step attack for `mode` replayed open loop and grouped into frame blocks.
std::vector<Vector> stealthy_attack_blocks(const UasScenario& s, const std::string& mode, int frames,
                                           double budget = 0.5e-3);

// GPS drift spoof a_t = t on every channel of `mode`, grouped into frame blocks.
std::vector<Vector> drift_attack_blocks(const UasScenario& s, const std::string& mode, int frames);

// Model files for both schedules, CSV traces and JSON reports for the three experiments.
void write_uas_bundle(const std::string& dir, std::uint64_t seed = 7);

}  // namespace liftguard
