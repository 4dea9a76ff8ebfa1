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

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace liftguard {

struct SensorSpec {
  std::string name;
  Matrix c;    // p_i x n
  Matrix d_u;  // p_i x m_u
  Matrix d_w;  // p_i x m_w

  Eigen::Index outputs() const { return c.rows(); }
};

// Attack mode: a named set of actuator/sensor channels. Sensors missing from
// `d_a` receive no direct attack injection.
struct AttackMode {
  std::string id;
  Matrix b_a;                          // n x m_a
  std::map<std::string, Matrix> d_a;  // sensor name -> p_i x m_a
};

struct NominalModel {
  Matrix a_hat;
  Matrix b_u_hat;
  Matrix b_w;
  Matrix e_hat;
  std::vector<SensorSpec> sensors;
  std::vector<AttackMode> modes;

  Eigen::Index state_dim() const { return a_hat.rows(); }
  Eigen::Index input_dim() const { return b_u_hat.cols(); }
  Eigen::Index noise_dim() const { return b_w.cols(); }
  Eigen::Index severity_dim() const { return e_hat.rows(); }
  Eigen::Index output_dim() const;

  const AttackMode& mode(const std::string& id) const;
  bool has_mode(const std::string& id) const;
  int sensor_index(const std::string& name) const;
  // Direct attack feedthrough of `sensor` under `mode`, zeros when absent.
  Matrix d_a(std::size_t sensor, const AttackMode& mode) const;

  // Shape checks; with `strict` the spectral radius of a_hat must be < 1.
  void validate(bool strict = true) const;
};

struct SensorSchedule {
  int frame_period = 1;
  // samples[i] lists 0-based offsets in [0, frame_period) for sensors[i].
  std::vector<std::vector<int>> samples;

  // Every sensor sampled once per step.
  static SensorSchedule every_step(std::size_t sensors);
  Eigen::Index sample_count() const;
  void validate(std::size_t sensors) const;
};

struct ModeChannels {
  Matrix b_a;  // n x T*m_a
  Matrix d_a;  // p x T*m_a
  Matrix f_a;  // T*p_z x T*m_a
  Eigen::Index step_dim = 0;  // m_a
};

// One lifted output row block.
struct SampleRow {
  int sensor = 0;
  int offset = 0;
  Eigen::Index first_row = 0;
  Eigen::Index rows = 0;
};

struct LiftedPlant {
  int frame_period = 1;
  Matrix a, b_u, c, d_u, b_w, d_w, e, f_w;
  std::map<std::string, ModeChannels> modes;
  std::vector<std::string> mode_ids;
  std::vector<SampleRow> rows;
  std::vector<std::string> sensor_names;
  Eigen::Index step_noise_dim = 0;
  Eigen::Index step_severity_dim = 0;

  Eigen::Index state_dim() const { return a.rows(); }
  Eigen::Index output_dim() const { return c.rows(); }
  Eigen::Index noise_dim() const { return b_w.cols(); }
  Eigen::Index severity_dim() const { return e.rows(); }
  const ModeChannels& channels(const std::string& mode) const;
};

struct LiftOptions {
  bool strict = true;
};

LiftedPlant lift(const NominalModel& model, const SensorSchedule& schedule,
                 const LiftOptions& options = {});

// The deviation dynamics for one attack mode:
//   x+ = A x + B a + Bw w,  y = C x + D a + Dw w,  z = E x + F a + Fw w.
struct DeviationSystem {
  Matrix a, b, c, d, e, f;
  Matrix b_w, d_w, f_w;

  Eigen::Index state_dim() const { return a.rows(); }
  Eigen::Index attack_dim() const { return b.cols(); }
  Eigen::Index output_dim() const { return c.rows(); }
  Eigen::Index severity_dim() const { return e.rows(); }
  Eigen::Index noise_dim() const { return b_w.cols(); }
  // Fills missing noise matrices with zero-column blocks and checks shapes.
  void normalize();
};

// `mode` empty means no attack channel (zero columns).
DeviationSystem deviation_system(const LiftedPlant& plant, const std::optional<std::string>& mode);

// Frame-indexed input block source; receives the current state so closed-loop
// policies and open-loop sequences share one interface.
using InputSource = std::function<Vector(int frame, const Vector& state)>;

InputSource zero_source(Eigen::Index dim);
// Replays `blocks`, then zeros.
InputSource sequence_source(std::vector<Vector> blocks, Eigen::Index dim);
// Passes through `inner` up to and including frame `last`, zeros afterwards.
InputSource truncate_source(InputSource inner, int last, Eigen::Index dim);

struct SimulationTrace {
  std::vector<Vector> x, y, z, a, w;
  Vector final_state;

  int frames() const { return static_cast<int>(y.size()); }
  double max_output_norm() const;
  std::vector<double> output_norms() const;
  std::vector<double> severity_norms() const;
};

SimulationTrace simulate(const DeviationSystem& sys, const Vector& x0, const InputSource& attack,
                         const InputSource& noise, int horizon);
SimulationTrace simulate(const LiftedPlant& plant, const std::optional<std::string>& mode,
                         const Vector& x0, const InputSource& attack, const InputSource& noise,
                         int horizon);

// Largest relative residual of the recursion over a recorded trace.
double recursion_residual(const DeviationSystem& sys, const SimulationTrace& trace);

// Groups per-step vectors into frame blocks of `period` steps (zero padded).
std::vector<Vector> pack_blocks(const std::vector<Vector>& steps, int period, Eigen::Index dim);

}  // namespace liftguard
