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

#include "liftguard/uas.hpp"

#include "liftguard/errors.hpp"
#include "liftguard/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>

namespace liftguard {

namespace {

InputSource ball_noise(Eigen::Index dim, double radius, std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng, dim, radius](int, const Vector&) { return kernels::sample_ball(*rng, dim, radius); };
}

std::optional<int> first_at_least(const std::vector<double>& v, double level) {
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] >= level) return static_cast<int>(k);
  }
  return std::nullopt;
}

std::vector<Vector> scaled_blocks(const std::vector<Vector>& blocks, double f) {
  std::vector<Vector> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(f * b);
  return out;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  return os;
}

}  // namespace

UasScenario uas_scenario() {
  UasScenario s;
  const double dt = s.dt;
  const Matrix i2 = Matrix::Identity(2, 2);
  s.a_o = Matrix::Identity(4, 4);
  s.a_o(0, 2) = dt;
  s.a_o(1, 3) = dt;
  s.b_o = Matrix::Zero(4, 2);
  s.b_o.topRows(2) = 0.5 * dt * dt * i2;
  s.b_o.bottomRows(2) = dt * i2;
  s.l_o = Matrix::Zero(4, 2);
  s.l_o.topRows(2) = 1.09 * i2;
  s.l_o.bottomRows(2) = 0.94 * i2;
  s.c_o = Matrix::Zero(2, 4);
  s.c_o.leftCols(2) = i2;
  s.k_o = Matrix::Zero(2, 4);
  s.k_o.leftCols(2) = 9.89 * i2;
  s.k_o.rightCols(2) = 7.24 * i2;

  NominalModel& m = s.model;
  const Matrix bk = s.b_o * s.k_o;
  m.a_hat = Matrix::Zero(8, 8);
  m.a_hat.topLeftCorner(4, 4) = s.a_o;
  m.a_hat.topRightCorner(4, 4) = -bk;
  m.a_hat.bottomLeftCorner(4, 4) = s.l_o * s.c_o;
  m.a_hat.bottomRightCorner(4, 4) = s.a_o - bk - s.l_o * s.c_o;
  m.b_u_hat = vstack(bk, bk);
  m.b_w = Matrix::Zero(8, 4);
  m.b_w.topLeftCorner(4, 2) = s.b_o;
  m.b_w.bottomRightCorner(4, 2) = s.l_o;
  m.e_hat = Matrix::Zero(2, 8);
  m.e_hat.leftCols(2) = i2;

  SensorSpec onboard;
  onboard.name = "onboard";
  onboard.c = Matrix::Zero(6, 8);
  onboard.c.topLeftCorner(2, 4) = s.c_o;
  onboard.c.bottomRightCorner(4, 4) = Matrix::Identity(4, 4);
  onboard.d_u = Matrix::Zero(6, 4);
  onboard.d_w = Matrix::Zero(6, 4);
  onboard.d_w.topRightCorner(2, 2) = i2;
  SensorSpec offboard;
  offboard.name = "offboard";
  offboard.c = Matrix::Zero(2, 8);
  offboard.c.leftCols(4) = s.c_o;
  offboard.d_u = Matrix::Zero(2, 4);
  offboard.d_w = Matrix::Zero(2, 4);
  m.sensors = {onboard, offboard};

  Matrix b_a = Matrix::Zero(8, 2);
  b_a.bottomRows(4) = s.l_o;
  Matrix d_a = Matrix::Zero(6, 2);
  d_a.topRows(2) = i2;
  m.modes.push_back({"gps", b_a, {{"onboard", d_a}}});
  m.modes.push_back({"1", b_a.col(0), {{"onboard", d_a.col(0)}}});
  m.modes.push_back({"2", b_a.col(1), {{"onboard", d_a.col(1)}}});

  s.per_step.frame_period = 1;
  s.per_step.samples = {{0}, {}};
  s.lifted_schedule.frame_period = 5;
  s.lifted_schedule.samples = {{0, 1, 2, 3, 4}, {0}};
  s.step_plant = lift(m, s.per_step);
  s.lifted_plant = lift(m, s.lifted_schedule);
  return s;
}

TrendFit fit_trend(const std::vector<double>& v, int first) {
  TrendFit f;
  const int n = static_cast<int>(v.size()) - first;
  if (n < 2) return f;
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (int k = first; k < static_cast<int>(v.size()); ++k) {
    const double t = k;
    st += t;
    sy += v[static_cast<std::size_t>(k)];
    stt += t * t;
    sty += t * v[static_cast<std::size_t>(k)];
  }
  const double den = n * stt - st * st;
  f.slope = (n * sty - st * sy) / den;
  f.intercept = (sy - f.slope * st) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (int k = first; k < static_cast<int>(v.size()); ++k) {
    const double y = v[static_cast<std::size_t>(k)];
    const double e = y - (f.intercept + f.slope * k);
    ss_res += e * e;
    ss_tot += (y - mean) * (y - mean);
  }
  f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

VulnerabilityExperiment experiment_vulnerability(const UasScenario& s, int steps, double budget) {
  VulnerabilityExperiment ex;
  const DeviationSystem sys = deviation_system(s.step_plant, "gps");
  ex.report = analyze_detectability(sys, {}, nullptr, "gps");
  SynthOptions opt;
  opt.stealth_budget = budget;
  ex.plan = synthesize(sys, ex.report, opt);
  const Vector x0 = Vector::Zero(sys.state_dim());
  const InputSource none = zero_source(sys.noise_dim());
  ex.trace = simulate(sys, x0, ex.plan.source(), none, steps);
  ex.disengage_step = steps / 2;
  ex.disengaged =
      simulate(sys, x0, truncate_source(ex.plan.source(), ex.disengage_step, sys.attack_dim()), none, steps);
  ex.severity_trend = fit_trend(ex.trace.severity_norms());
  ex.max_output = ex.trace.max_output_norm();
  return ex;
}

std::vector<Vector> stealthy_attack_blocks(const UasScenario& s, const std::string& mode, int frames, double budget) {
  const DeviationSystem sys = deviation_system(s.step_plant, mode);
  const DetectabilityReport rep = analyze_detectability(sys, {}, nullptr, mode);
  if (!rep.vulnerable()) throw Error("per-step mode '" + mode + "' admits no stealthy attack");
  SynthOptions opt;
  opt.stealth_budget = budget;
  const AttackPlan plan = synthesize(sys, rep, opt);
  const int period = s.lifted_plant.frame_period;
  const SimulationTrace tr = simulate(sys, Vector::Zero(sys.state_dim()), plan.source(),
                                      zero_source(sys.noise_dim()), frames * period);
  return pack_blocks(tr.a, period, sys.attack_dim());
}

std::vector<Vector> drift_attack_blocks(const UasScenario& s, const std::string& mode, int frames) {
  const Eigen::Index m = s.step_plant.channels(mode).step_dim;
  const int period = s.lifted_plant.frame_period;
  std::vector<Vector> steps;
  for (int t = 0; t < frames * period; ++t) steps.push_back(Vector::Constant(m, static_cast<double>(t)));
  return pack_blocks(steps, period, m);
}

DetectionExperiment experiment_detection(const UasScenario& s, std::uint64_t seed, int runs, int frames) {
  DetectionExperiment ex;
  const LiftedPlant& plant = s.lifted_plant;
  const DeviationSystem sys = deviation_system(plant, "gps");
  ex.report = analyze_detectability(sys, {}, nullptr, "gps");
  ex.thresholds = compute_thresholds(sys, ex.report);
  ex.noise_runs = kernels::noise_runs(sys, runs, frames, seed, ex.thresholds.options.noise_bound);
  for (const auto& r : ex.noise_runs) {
    if (r.peak_output >= ex.thresholds.epsilon) ++ex.false_alarms;
  }

  // Scale the per-step stealthy attack so ||z|| reaches delta near frame 60.
  const std::vector<Vector> unit = stealthy_attack_blocks(s, "gps", frames);
  const SimulationTrace probe = simulate(sys, Vector::Zero(sys.state_dim()), sequence_source(unit, sys.attack_dim()),
                                         zero_source(sys.noise_dim()), frames);
  const int aim = std::min(60, frames - 1);
  const double z_aim = probe.severity_norms()[static_cast<std::size_t>(aim)];
  if (!(z_aim > 0.0)) throw NumericalError("detection experiment: attack produces no severity");
  ex.attack_scale = ex.thresholds.delta / z_aim;
  ex.disengage_frame = (3 * frames) / 4;
  const std::vector<Vector> blocks(unit.begin(), unit.begin() + ex.disengage_frame);
  ex.attack_trace = simulate(sys, Vector::Zero(sys.state_dim()),
                             sequence_source(scaled_blocks(blocks, ex.attack_scale), sys.attack_dim()),
                             ball_noise(sys.noise_dim(), ex.thresholds.options.noise_bound, seed ^ 0xA5A5ULL), frames);
  ex.alarm_frame = alarm(ex.attack_trace, ex.thresholds.epsilon);
  ex.severity_cross_frame = first_at_least(ex.attack_trace.severity_norms(), ex.thresholds.delta);
  return ex;
}

IdentificationExperiment experiment_identification(const UasScenario& s, const std::string& true_mode, bool attack,
                                                   std::uint64_t seed, int frames) {
  IdentificationExperiment ex;
  ex.true_mode = true_mode;
  ex.attacked = attack;
  const LiftedPlant& plant = s.lifted_plant;
  const std::vector<std::string> modes = {"1", "2"};
  ex.identifiability = check_identifiable(plant, modes);
  ex.epsilon = calibrate_identification_thresholds(plant, modes, 1.0);
  const DeviationSystem sys = deviation_system(plant, true_mode);
  ex.detection = compute_thresholds(plant, true_mode);
  const ResidualBank bank = build_residual_bank(plant, modes, ex.epsilon);

  std::vector<Vector> unit;
  double scale = 0.0;
  if (attack) {
    unit = drift_attack_blocks(s, true_mode, frames);
    const SimulationTrace probe = simulate(sys, Vector::Zero(sys.state_dim()),
                                           sequence_source(unit, sys.attack_dim()), zero_source(sys.noise_dim()),
                                           frames);
    const double z_aim = probe.severity_norms()[static_cast<std::size_t>(std::min(40, frames - 1))];
    if (!(z_aim > 0.0)) throw NumericalError("identification experiment: attack produces no severity");
    scale = ex.detection.delta / z_aim;
  }
  const auto run = [&](double f, std::uint64_t run_seed) {
    InputSource a = attack ? sequence_source(scaled_blocks(unit, f), sys.attack_dim()) : zero_source(sys.attack_dim());
    return simulate(sys, Vector::Zero(sys.state_dim()), a, ball_noise(sys.noise_dim(), 1.0, run_seed), frames);
  };
  ex.trace = run(scale, seed);
  ex.alarm_frame = alarm(ex.trace, ex.detection.epsilon);
  ex.onset_frame = first_at_least(ex.trace.severity_norms(), ex.detection.delta);
  ex.history = run_identification(bank, ex.trace, attack && ex.alarm_frame ? *ex.alarm_frame : 0);
  const int truth = bank.index(true_mode);
  for (const auto& st : ex.history.steps) {
    for (std::size_t i = 0; i < st.residuals.size(); ++i) {
      if (static_cast<int>(i) != truth && st.residuals[i] >= bank.modes[i].epsilon && !ex.first_exceed_other) {
        ex.first_exceed_other = st.frame;
      }
    }
  }

  if (attack) {
    // Scale sweep for the empirical collapse severity.
    for (int i = 0; i < 8; ++i) {
      const double f = scale * std::pow(0.5, i);
      const SimulationTrace tr = run(f, kernels::stream_seed(seed, static_cast<std::uint64_t>(i + 1)));
      const IdentificationHistory h = run_identification(bank, tr, 0);
      if (!h.collapse_frame) continue;
      const auto fm = h.final_modes();
      if (fm.size() != 1 || fm.front() != true_mode) continue;
      const double z = tr.severity_norms()[static_cast<std::size_t>(*h.collapse_frame)];
      ex.delta_q_estimate = ex.delta_q_estimate ? std::min(*ex.delta_q_estimate, z) : z;
    }
  }
  return ex;
}

void write_uas_bundle(const std::string& dir, std::uint64_t seed) {
  namespace fs = std::filesystem;
  const fs::path out(dir);
  fs::create_directories(out);
  const UasScenario s = uas_scenario();
  save_model((out / "uas_model_step.json").string(), s.model, &s.per_step);
  save_model((out / "uas_model_lifted.json").string(), s.model, &s.lifted_schedule);

  const VulnerabilityExperiment v = experiment_vulnerability(s);
  {
    auto os = open_out(out / "vulnerability_trace.csv");
    write_trace_csv(os, v.trace, &s.step_plant);
  }
  Json jv;
  jv["report"] = report_to_json(v.report, true);
  jv["plan"] = plan_to_json(v.plan);
  jv["max_output_norm"] = v.max_output;
  jv["severity_trend"] = {{"slope", v.severity_trend.slope}, {"r2", v.severity_trend.r2}};
  write_json_file((out / "vulnerability.json").string(), jv);

  const DetectionExperiment d = experiment_detection(s, seed);
  {
    auto os = open_out(out / "detection_trace.csv");
    write_trace_csv(os, d.attack_trace, &s.lifted_plant);
  }
  Json jd;
  jd["report"] = report_to_json(d.report);
  jd["thresholds"] = thresholds_to_json(d.thresholds);
  jd["noise_runs"] = d.noise_runs.size();
  jd["false_alarms"] = d.false_alarms;
  jd["attack_scale"] = d.attack_scale;
  jd["disengage_frame"] = d.disengage_frame;
  jd["alarm_frame"] = d.alarm_frame ? *d.alarm_frame : -1;
  jd["severity_cross_frame"] = d.severity_cross_frame ? *d.severity_cross_frame : -1;
  write_json_file((out / "detection.json").string(), jd);

  Json ji = Json::object();
  for (const std::string mode : {"1", "2"}) {
    const IdentificationExperiment e = experiment_identification(s, mode, true, seed);
    auto os = open_out(out / ("identification_mode" + mode + ".csv"));
    write_identification_csv(os, e.history);
    Json je;
    je["identifiability"] = identifiability_to_json(e.identifiability);
    je["epsilon"] = e.epsilon;
    je["alarm_frame"] = e.alarm_frame ? *e.alarm_frame : -1;
    je["onset_frame"] = e.onset_frame ? *e.onset_frame : -1;
    je["first_exceed_other"] = e.first_exceed_other ? *e.first_exceed_other : -1;
    je["history"] = history_summary_to_json(e.history);
    if (e.delta_q_estimate) je["delta_q_estimate_uncertified"] = *e.delta_q_estimate;
    ji[mode] = std::move(je);
  }
  write_json_file((out / "identification.json").string(), ji);
}

}  // namespace liftguard
