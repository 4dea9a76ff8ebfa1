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

#include "liftguard/model.hpp"

#include "liftguard/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace liftguard {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void expect_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(what + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                         ", got " + shape(m));
  }
}

// Powers A^0 .. A^{count-1}.
std::vector<Matrix> powers(const Matrix& a, int count) {
  std::vector<Matrix> p;
  p.reserve(static_cast<std::size_t>(count));
  p.push_back(Matrix::Identity(a.rows(), a.cols()));
  for (int k = 1; k < count; ++k) p.push_back(p.back() * a);
  return p;
}

// State-input block row [A^{T-1} B, ..., A B, B].
Matrix lift_input(const std::vector<Matrix>& a_pow, const Matrix& b, int period) {
  const Eigen::Index n = b.rows();
  const Eigen::Index m = b.cols();
  Matrix out = Matrix::Zero(n, period * m);
  for (int s = 0; s < period; ++s) {
    out.middleCols(s * m, m) = a_pow[static_cast<std::size_t>(period - 1 - s)] * b;
  }
  return out;
}

// Feedthrough row block of a sample at offset t: blocks s < t carry
// C A^{t-1-s} B, block t carries the direct term, later blocks are zero.
Matrix lift_feedthrough(const std::vector<Matrix>& a_pow, const Matrix& c, const Matrix& b,
                        const Matrix& direct, int t, int period) {
  const Eigen::Index m = b.cols();
  Matrix out = Matrix::Zero(c.rows(), period * m);
  for (int s = 0; s < t; ++s) {
    out.middleCols(s * m, m) = c * a_pow[static_cast<std::size_t>(t - 1 - s)] * b;
  }
  if (m > 0) out.middleCols(t * m, m) = direct;
  return out;
}

}  // namespace

Eigen::Index NominalModel::output_dim() const {
  Eigen::Index p = 0;
  for (const auto& s : sensors) p += s.outputs();
  return p;
}

const AttackMode& NominalModel::mode(const std::string& id) const {
  for (const auto& m : modes) {
    if (m.id == id) return m;
  }
  throw DimensionError("unknown attack mode '" + id + "'");
}

bool NominalModel::has_mode(const std::string& id) const {
  return std::any_of(modes.begin(), modes.end(), [&](const AttackMode& m) { return m.id == id; });
}

int NominalModel::sensor_index(const std::string& name) const {
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    if (sensors[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

Matrix NominalModel::d_a(std::size_t sensor, const AttackMode& m) const {
  const auto& s = sensors.at(sensor);
  auto it = m.d_a.find(s.name);
  if (it == m.d_a.end()) return Matrix::Zero(s.outputs(), m.b_a.cols());
  return it->second;
}

void NominalModel::validate(bool strict) const {
  const Eigen::Index n = a_hat.rows();
  if (n == 0) throw DimensionError("a_hat is empty");
  expect_shape(a_hat, n, n, "a_hat");
  if (b_u_hat.rows() != n) throw DimensionError("b_u_hat: expected " + std::to_string(n) + " rows");
  if (b_w.rows() != n) throw DimensionError("b_w: expected " + std::to_string(n) + " rows");
  if (e_hat.cols() != n) throw DimensionError("e_hat: expected " + std::to_string(n) + " columns");
  if (sensors.empty()) throw DimensionError("model has no sensors");
  for (std::size_t i = 0; i < sensors.size(); ++i) {
    const auto& s = sensors[i];
    if (s.name.empty()) throw DimensionError("sensor " + std::to_string(i) + " has no name");
    for (std::size_t j = 0; j < i; ++j) {
      if (sensors[j].name == s.name) throw DimensionError("duplicate sensor '" + s.name + "'");
    }
    if (s.c.cols() != n) throw DimensionError("sensor '" + s.name + "' c: expected " + std::to_string(n) + " columns");
    expect_shape(s.d_u, s.outputs(), input_dim(), "sensor '" + s.name + "' d_u");
    expect_shape(s.d_w, s.outputs(), noise_dim(), "sensor '" + s.name + "' d_w");
  }
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& m = modes[i];
    if (m.id.empty()) throw DimensionError("mode " + std::to_string(i) + " has no id");
    for (std::size_t j = 0; j < i; ++j) {
      if (modes[j].id == m.id) throw DimensionError("duplicate mode '" + m.id + "'");
    }
    if (m.b_a.rows() != n) throw DimensionError("mode '" + m.id + "' b_a: expected " + std::to_string(n) + " rows");
    for (const auto& [name, d] : m.d_a) {
      const int idx = sensor_index(name);
      if (idx < 0) throw DimensionError("mode '" + m.id + "' references unknown sensor '" + name + "'");
      expect_shape(d, sensors[static_cast<std::size_t>(idx)].outputs(), m.b_a.cols(),
                   "mode '" + m.id + "' d_a[" + name + "]");
    }
  }
  if (!a_hat.allFinite()) throw DimensionError("a_hat has non-finite entries");
  if (strict) {
    const double rho = spectral_radius(a_hat);
    if (!(rho < 1.0)) {
      std::ostringstream os;
      os << "nominal dynamics unstable: spectral radius " << rho << " >= 1";
      throw UnstableModelError(os.str());
    }
  }
}

SensorSchedule SensorSchedule::every_step(std::size_t sensors) {
  SensorSchedule s;
  s.frame_period = 1;
  s.samples.assign(sensors, std::vector<int>{0});
  return s;
}

Eigen::Index SensorSchedule::sample_count() const {
  Eigen::Index k = 0;
  for (const auto& s : samples) k += static_cast<Eigen::Index>(s.size());
  return k;
}

void SensorSchedule::validate(std::size_t sensors) const {
  if (frame_period < 1) throw DimensionError("frame_period must be positive");
  if (samples.size() != sensors) {
    throw DimensionError("schedule lists " + std::to_string(samples.size()) + " sensors, model has " +
                         std::to_string(sensors));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (s[j] < 0 || s[j] >= frame_period) {
        throw DimensionError("sensor " + std::to_string(i) + ": offset " + std::to_string(s[j]) +
                             " outside [0, " + std::to_string(frame_period) + ")");
      }
      if (j > 0 && s[j] <= s[j - 1]) {
        throw DimensionError("sensor " + std::to_string(i) + ": offsets must be strictly increasing");
      }
    }
  }
  if (sample_count() == 0) throw DimensionError("schedule has no samples");
}

const ModeChannels& LiftedPlant::channels(const std::string& mode) const {
  auto it = modes.find(mode);
  if (it == modes.end()) throw DimensionError("unknown attack mode '" + mode + "'");
  return it->second;
}

LiftedPlant lift(const NominalModel& model, const SensorSchedule& schedule, const LiftOptions& options) {
  model.validate(options.strict);
  schedule.validate(model.sensors.size());

  const int period = schedule.frame_period;
  const Eigen::Index n = model.state_dim();
  const auto a_pow = powers(model.a_hat, period + 1);

  LiftedPlant out;
  out.frame_period = period;
  out.a = a_pow[static_cast<std::size_t>(period)];
  out.step_noise_dim = model.noise_dim();
  out.step_severity_dim = model.severity_dim();
  for (const auto& s : model.sensors) out.sensor_names.push_back(s.name);

  Eigen::Index p = 0;
  for (std::size_t i = 0; i < model.sensors.size(); ++i) {
    for (int t : schedule.samples[i]) {
      out.rows.push_back({static_cast<int>(i), t, p, model.sensors[i].outputs()});
      p += model.sensors[i].outputs();
    }
  }

  // Stacks the output rows for one input channel given per-sensor directs.
  auto lift_outputs = [&](const Matrix& b, const std::vector<Matrix>& directs) {
    Matrix d = Matrix::Zero(p, period * b.cols());
    for (const auto& row : out.rows) {
      const auto& sensor = model.sensors[static_cast<std::size_t>(row.sensor)];
      d.middleRows(row.first_row, row.rows) =
          lift_feedthrough(a_pow, sensor.c, b, directs[static_cast<std::size_t>(row.sensor)], row.offset, period);
    }
    return d;
  };
  auto lift_severity = [&](const Matrix& b) {
    const Eigen::Index pz = model.severity_dim();
    Matrix f = Matrix::Zero(period * pz, period * b.cols());
    const Matrix zero = Matrix::Zero(pz, b.cols());
    for (int t = 0; t < period; ++t) {
      f.middleRows(t * pz, pz) = lift_feedthrough(a_pow, model.e_hat, b, zero, t, period);
    }
    return f;
  };

  out.c = Matrix::Zero(p, n);
  for (const auto& row : out.rows) {
    out.c.middleRows(row.first_row, row.rows) =
        model.sensors[static_cast<std::size_t>(row.sensor)].c * a_pow[static_cast<std::size_t>(row.offset)];
  }
  out.e = Matrix::Zero(period * model.severity_dim(), n);
  for (int t = 0; t < period; ++t) {
    out.e.middleRows(t * model.severity_dim(), model.severity_dim()) = model.e_hat * a_pow[static_cast<std::size_t>(t)];
  }

  std::vector<Matrix> du, dw;
  for (const auto& s : model.sensors) {
    du.push_back(s.d_u);
    dw.push_back(s.d_w);
  }
  out.b_u = lift_input(a_pow, model.b_u_hat, period);
  out.d_u = lift_outputs(model.b_u_hat, du);
  out.b_w = lift_input(a_pow, model.b_w, period);
  out.d_w = lift_outputs(model.b_w, dw);
  out.f_w = lift_severity(model.b_w);

  for (const auto& mode : model.modes) {
    std::vector<Matrix> da;
    for (std::size_t i = 0; i < model.sensors.size(); ++i) da.push_back(model.d_a(i, mode));
    ModeChannels ch;
    ch.step_dim = mode.b_a.cols();
    ch.b_a = lift_input(a_pow, mode.b_a, period);
    ch.d_a = lift_outputs(mode.b_a, da);
    ch.f_a = lift_severity(mode.b_a);
    out.modes.emplace(mode.id, std::move(ch));
    out.mode_ids.push_back(mode.id);
  }
  return out;
}

void DeviationSystem::normalize() {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw DimensionError("A must be square, got " + shape(a));
  if (b.size() == 0) b = Matrix::Zero(n, b.cols());
  if (c.size() == 0 && c.rows() == 0) c = Matrix::Zero(0, n);
  if (e.size() == 0 && e.rows() == 0) e = Matrix::Zero(0, n);
  const Eigen::Index m = b.cols();
  if (d.size() == 0) d = Matrix::Zero(c.rows(), m);
  if (f.size() == 0) f = Matrix::Zero(e.rows(), m);
  const Eigen::Index mw = b_w.cols();
  if (b_w.size() == 0) b_w = Matrix::Zero(n, mw);
  if (d_w.size() == 0) d_w = Matrix::Zero(c.rows(), mw);
  if (f_w.size() == 0) f_w = Matrix::Zero(e.rows(), mw);
  expect_shape(b, n, m, "B");
  expect_shape(c, c.rows(), n, "C");
  expect_shape(d, c.rows(), m, "D");
  expect_shape(e, e.rows(), n, "E");
  expect_shape(f, e.rows(), m, "F");
  expect_shape(b_w, n, mw, "Bw");
  expect_shape(d_w, c.rows(), mw, "Dw");
  expect_shape(f_w, e.rows(), mw, "Fw");
}

DeviationSystem deviation_system(const LiftedPlant& plant, const std::optional<std::string>& mode) {
  DeviationSystem s;
  s.a = plant.a;
  s.c = plant.c;
  s.e = plant.e;
  s.b_w = plant.b_w;
  s.d_w = plant.d_w;
  s.f_w = plant.f_w;
  if (mode) {
    const auto& ch = plant.channels(*mode);
    s.b = ch.b_a;
    s.d = ch.d_a;
    s.f = ch.f_a;
  } else {
    s.b = Matrix::Zero(plant.state_dim(), 0);
    s.d = Matrix::Zero(plant.output_dim(), 0);
    s.f = Matrix::Zero(plant.severity_dim(), 0);
  }
  return s;
}

InputSource zero_source(Eigen::Index dim) {
  return [dim](int, const Vector&) { return Vector::Zero(dim).eval(); };
}

InputSource sequence_source(std::vector<Vector> blocks, Eigen::Index dim) {
  return [blocks = std::move(blocks), dim](int k, const Vector&) -> Vector {
    if (k >= 0 && static_cast<std::size_t>(k) < blocks.size()) return blocks[static_cast<std::size_t>(k)];
    return Vector::Zero(dim);
  };
}

InputSource truncate_source(InputSource inner, int last, Eigen::Index dim) {
  return [inner = std::move(inner), last, dim](int k, const Vector& x) -> Vector {
    if (k <= last) return inner(k, x);
    return Vector::Zero(dim);
  };
}

double SimulationTrace::max_output_norm() const {
  double m = 0.0;
  for (const auto& v : y) m = std::max(m, v.norm());
  return m;
}

std::vector<double> SimulationTrace::output_norms() const {
  std::vector<double> r;
  r.reserve(y.size());
  for (const auto& v : y) r.push_back(v.norm());
  return r;
}

std::vector<double> SimulationTrace::severity_norms() const {
  std::vector<double> r;
  r.reserve(z.size());
  for (const auto& v : z) r.push_back(v.norm());
  return r;
}

SimulationTrace simulate(const DeviationSystem& sys_in, const Vector& x0, const InputSource& attack,
                         const InputSource& noise, int horizon) {
  DeviationSystem sys = sys_in;
  sys.normalize();
  if (x0.size() != sys.state_dim()) {
    throw DimensionError("x0 has " + std::to_string(x0.size()) + " entries, expected " +
                         std::to_string(sys.state_dim()));
  }
  SimulationTrace tr;
  tr.x.reserve(static_cast<std::size_t>(horizon));
  Vector x = x0;
  for (int k = 0; k < horizon; ++k) {
    Vector a = attack ? attack(k, x) : Vector::Zero(sys.attack_dim());
    Vector w = noise ? noise(k, x) : Vector::Zero(sys.noise_dim());
    if (a.size() != sys.attack_dim()) {
      throw DimensionError("attack block at frame " + std::to_string(k) + " has " + std::to_string(a.size()) +
                           " entries, expected " + std::to_string(sys.attack_dim()));
    }
    if (w.size() != sys.noise_dim()) {
      throw DimensionError("noise block at frame " + std::to_string(k) + " has " + std::to_string(w.size()) +
                           " entries, expected " + std::to_string(sys.noise_dim()));
    }
    tr.x.push_back(x);
    tr.y.push_back(sys.c * x + sys.d * a + sys.d_w * w);
    tr.z.push_back(sys.e * x + sys.f * a + sys.f_w * w);
    x = sys.a * x + sys.b * a + sys.b_w * w;
    tr.a.push_back(std::move(a));
    tr.w.push_back(std::move(w));
  }
  tr.final_state = x;
  return tr;
}

SimulationTrace simulate(const LiftedPlant& plant, const std::optional<std::string>& mode, const Vector& x0,
                         const InputSource& attack, const InputSource& noise, int horizon) {
  return simulate(deviation_system(plant, mode), x0, attack, noise, horizon);
}

double recursion_residual(const DeviationSystem& sys_in, const SimulationTrace& tr) {
  DeviationSystem sys = sys_in;
  sys.normalize();
  double worst = 0.0;
  const auto rel = [](const Vector& r, double scale) { return r.norm() / std::max(1.0, scale); };
  for (std::size_t k = 0; k < tr.y.size(); ++k) {
    const Vector& x = tr.x[k];
    const Vector next = k + 1 < tr.x.size() ? tr.x[k + 1] : tr.final_state;
    const double scale = x.norm() + tr.a[k].norm() + tr.w[k].norm();
    worst = std::max(worst, rel(next - sys.a * x - sys.b * tr.a[k] - sys.b_w * tr.w[k], scale));
    worst = std::max(worst, rel(tr.y[k] - sys.c * x - sys.d * tr.a[k] - sys.d_w * tr.w[k], scale));
    worst = std::max(worst, rel(tr.z[k] - sys.e * x - sys.f * tr.a[k] - sys.f_w * tr.w[k], scale));
  }
  return worst;
}

std::vector<Vector> pack_blocks(const std::vector<Vector>& steps, int period, Eigen::Index dim) {
  std::vector<Vector> blocks;
  const std::size_t frames = (steps.size() + static_cast<std::size_t>(period) - 1) / static_cast<std::size_t>(period);
  for (std::size_t f = 0; f < frames; ++f) {
    Vector b = Vector::Zero(period * dim);
    for (int t = 0; t < period; ++t) {
      const std::size_t idx = f * static_cast<std::size_t>(period) + static_cast<std::size_t>(t);
      if (idx < steps.size()) b.segment(t * dim, dim) = steps[idx];
    }
    blocks.push_back(std::move(b));
  }
  return blocks;
}

}  // namespace liftguard
