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

#include "cli.hpp"

#include "liftguard/detect.hpp"
#include "liftguard/errors.hpp"
#include "liftguard/identify.hpp"
#include "liftguard/kernels.hpp"
#include "liftguard/model_io.hpp"
#include "liftguard/report_io.hpp"
#include "liftguard/synth.hpp"
#include "liftguard/uas.hpp"

#include "CLI11.hpp"

#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

namespace liftguard::cli {

namespace {

struct RunConfig {
  std::string model_path;
  std::string schedule_path;
  std::string mode;
  std::vector<std::string> modes;
  int horizon = 0;
  std::uint64_t seed = 7;
  std::vector<std::string> tol;
  std::string out;
  bool strict = false;
  bool allow_unstable = false;
  bool dump_subspaces = false;
  std::string plan_path;
  double noise = 0.0;
  double budget = 1e-3;
  std::string convention = "zero";
};

void configure_logging() {
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("LIFTGUARD_LOG")) level = spdlog::level::from_str(env);
  spdlog::set_level(level);
  spdlog::set_pattern("[%l] %v");
}

Tolerances parse_tolerances(const std::vector<std::string>& items) {
  Tolerances t;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    const std::string key = eq == std::string::npos ? "rank" : item.substr(0, eq);
    const std::string val = eq == std::string::npos ? item : item.substr(eq + 1);
    double v = 0.0;
    try {
      v = std::stod(val);
    } catch (const std::exception&) {
      throw FormatError("--tol: '" + val + "' is not a number");
    }
    if (key == "rank") t.rank = v;
    else if (key == "angle") t.angle = v;
    else if (key == "residual") t.residual = v;
    else if (key == "eig_cluster") t.eig_cluster = v;
    else if (key == "eig_kernel") t.eig_kernel = v;
    else if (key == "unit_band") t.unit_band = v;
    else throw FormatError("--tol: unknown tolerance '" + key + "'");
  }
  return t;
}

struct Loaded {
  NominalModel model;
  SensorSchedule schedule;
  LiftedPlant plant;
};

Loaded load(const RunConfig& cfg) {
  if (cfg.model_path.empty()) throw FormatError("--model is required");
  Loaded l;
  ModelDocument doc = load_model(cfg.model_path, !cfg.allow_unstable);
  l.model = std::move(doc.model);
  if (!cfg.schedule_path.empty()) l.schedule = load_schedule(cfg.schedule_path, l.model);
  else if (doc.schedule) l.schedule = *doc.schedule;
  else l.schedule = SensorSchedule::every_step(l.model.sensors.size());
  LiftOptions opt;
  opt.strict = !cfg.allow_unstable;
  l.plant = lift(l.model, l.schedule, opt);
  spdlog::info("lifted plant: n={} p={} T={}", l.plant.state_dim(), l.plant.output_dim(), l.plant.frame_period);
  return l;
}

std::vector<std::string> selected_modes(const RunConfig& cfg, const LiftedPlant& plant) {
  if (!cfg.modes.empty()) return cfg.modes;
  if (!cfg.mode.empty()) return {cfg.mode};
  return plant.mode_ids;
}

const std::string& single_mode(const RunConfig& cfg, const LiftedPlant& plant) {
  if (!cfg.mode.empty()) return cfg.mode;
  if (plant.mode_ids.size() == 1) return plant.mode_ids.front();
  throw FormatError("--mode is required when the model has several attack modes");
}

// Writes `name` under --out, or prints the JSON when no directory is given.
void emit(const RunConfig& cfg, const std::string& name, const Json& j) {
  if (cfg.out.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::filesystem::create_directories(cfg.out);
  const std::string path = (std::filesystem::path(cfg.out) / name).string();
  write_json_file(path, j);
  spdlog::info("wrote {}", path);
}

int cmd_lift(const RunConfig& cfg) {
  const Loaded l = load(cfg);
  emit(cfg, "lifted.json", lifted_to_json(l.plant));
  return 0;
}

int cmd_detectability(const RunConfig& cfg) {
  const Loaded l = load(cfg);
  const Tolerances tol = parse_tolerances(cfg.tol);
  Json reports = Json::array();
  bool vulnerable = false;
  for (const auto& mode : selected_modes(cfg, l.plant)) {
    const DetectabilityReport rep = analyze_detectability(deviation_system(l.plant, mode), tol, nullptr, mode);
    for (const auto& f : rep.flags) spdlog::warn("{}: {}", mode, f);
    vulnerable = vulnerable || rep.vulnerable();
    reports.push_back(report_to_json(rep, cfg.dump_subspaces));
  }
  emit(cfg, "detectability.json", reports.size() == 1 ? reports.front() : Json{{"reports", reports}});
  return cfg.strict && vulnerable ? 2 : 0;
}

int cmd_identifiability(const RunConfig& cfg) {
  const Loaded l = load(cfg);
  const Tolerances tol = parse_tolerances(cfg.tol);
  const auto modes = selected_modes(cfg, l.plant);
  const IdentifiabilityResult r =
      check_identifiable(l.plant, modes, initial_state_from_string(cfg.convention), tol);
  emit(cfg, "identifiability.json", identifiability_to_json(r));
  return cfg.strict && !r.identifiable ? 2 : 0;
}

int cmd_synth(const RunConfig& cfg) {
  const Loaded l = load(cfg);
  const Tolerances tol = parse_tolerances(cfg.tol);
  const std::string& mode = single_mode(cfg, l.plant);
  const DeviationSystem sys = deviation_system(l.plant, mode);
  const DetectabilityReport rep = analyze_detectability(sys, tol, nullptr, mode);
  if (!rep.vulnerable()) throw Error("mode '" + mode + "' is detectable; no stealthy attack exists");
  SynthOptions opt;
  opt.stealth_budget = cfg.budget;
  const AttackPlan plan = synthesize(sys, rep, opt);
  Json j = plan_to_json(plan);
  j["mode"] = mode;
  emit(cfg, "plan.json", j);
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  const Loaded l = load(cfg);
  const int horizon = cfg.horizon > 0 ? cfg.horizon : 100;
  std::optional<AttackPlan> plan;
  std::string mode = cfg.mode;
  if (!cfg.plan_path.empty()) {
    const Json pj = read_json_file(cfg.plan_path);
    plan = plan_from_json(pj);
    if (mode.empty() && pj.contains("mode")) mode = pj.at("mode").get<std::string>();
  }
  const std::optional<std::string> m = mode.empty() ? std::nullopt : std::optional<std::string>(mode);
  const DeviationSystem sys = deviation_system(l.plant, m);
  if (plan && plan->attack_dim != sys.attack_dim()) throw DimensionError("plan attack dimension does not match mode");
  InputSource attack = plan ? plan->source() : zero_source(sys.attack_dim());
  InputSource noise = zero_source(sys.noise_dim());
  if (cfg.noise > 0.0) {
    auto rng = std::make_shared<std::mt19937_64>(cfg.seed);
    const Eigen::Index dim = sys.noise_dim();
    const double r = cfg.noise;
    noise = [rng, dim, r](int, const Vector&) { return kernels::sample_ball(*rng, dim, r); };
  }
  const SimulationTrace tr = simulate(l.plant, m, Vector::Zero(l.plant.state_dim()), attack, noise, horizon);

  Json summary;
  summary["frames"] = horizon;
  summary["max_output_norm"] = tr.max_output_norm();
  const auto zn = tr.severity_norms();
  summary["max_severity_norm"] = zn.empty() ? 0.0 : *std::max_element(zn.begin(), zn.end());
  if (plan) {
    const PlanCertificate& c = plan->certificate;
    const double slack = 1e-9 + 1e-6 * c.stealth_bound;
    summary["certificate"] = {{"stealth_bound", c.stealth_bound},
                              {"law", to_string(c.law)},
                              {"rate", c.rate},
                              {"stealth_ok", cfg.noise == 0.0 && tr.max_output_norm() <= c.stealth_bound + slack}};
    if (c.law == GrowthLaw::linear && horizon > c.onset_frame + 2) {
      const TrendFit fit = fit_trend(zn, c.onset_frame);
      summary["certificate"]["observed_slope"] = fit.slope;
      summary["certificate"]["r2"] = fit.r2;
    }
  }
  if (cfg.out.empty()) {
    write_trace_csv(std::cout, tr, &l.plant);
    return 0;
  }
  std::filesystem::create_directories(cfg.out);
  std::ofstream os(std::filesystem::path(cfg.out) / "trace.csv");
  if (!os) throw Error("cannot write trace.csv under " + cfg.out);
  write_trace_csv(os, tr, &l.plant);
  emit(cfg, "summary.json", summary);
  return 0;
}

int cmd_thresholds(const RunConfig& cfg) {
  const Loaded l = load(cfg);
  const Tolerances tol = parse_tolerances(cfg.tol);
  ThresholdOptions opt;
  if (cfg.horizon > 0) opt.horizon = cfg.horizon;
  if (cfg.noise > 0.0) opt.noise_bound = cfg.noise;
  Json all = Json::array();
  bool vulnerable = false;
  for (const auto& mode : selected_modes(cfg, l.plant)) {
    const DeviationSystem sys = deviation_system(l.plant, mode);
    const DetectabilityReport rep = analyze_detectability(sys, tol, nullptr, mode);
    if (rep.vulnerable()) {
      vulnerable = true;
      all.push_back({{"mode", mode}, {"verdict", "vulnerable"}});
      spdlog::warn("{}: vulnerable, no thresholds", mode);
      continue;
    }
    Json j = thresholds_to_json(compute_thresholds(sys, rep, opt, tol));
    j["mode"] = mode;
    all.push_back(std::move(j));
  }
  if (vulnerable && cfg.mode.size() && all.size() == 1) throw ThresholdError("mode '" + cfg.mode + "' is vulnerable");
  emit(cfg, "thresholds.json", all.size() == 1 ? all.front() : Json{{"thresholds", all}});
  return cfg.strict && vulnerable ? 2 : 0;
}

int cmd_uas_demo(const RunConfig& cfg) {
  const std::string dir = cfg.out.empty() ? "uas_out" : cfg.out;
  write_uas_bundle(dir, cfg.seed);
  std::cout << "wrote UAS experiment bundle to " << dir << "\n";
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  configure_logging();
  CLI::App app{"liftguard: attack detectability and identifiability for lifted LTI plants"};
  app.require_subcommand(1);
  RunConfig cfg;

  const auto add_common = [&](CLI::App* sub, bool needs_model) {
    auto* opt = sub->add_option("--model", cfg.model_path, "model JSON");
    if (needs_model) opt->required();
    sub->add_option("--schedule", cfg.schedule_path, "schedule JSON (default: model's schedule or every step)");
    sub->add_flag("--allow-unstable", cfg.allow_unstable, "accept models with spectral radius >= 1");
    sub->add_option("--tol", cfg.tol, "tolerance override key=value (rank, angle, residual, eig_cluster, ...)");
    sub->add_option("--out", cfg.out, "output directory (default: stdout)");
  };

  auto* lift_cmd = app.add_subcommand("lift", "emit the lifted matrices");
  add_common(lift_cmd, true);

  auto* det = app.add_subcommand("detectability", "detectability verdict per mode");
  add_common(det, true);
  det->add_option("--mode", cfg.mode, "attack mode (default: all)");
  det->add_flag("--strict", cfg.strict, "exit 2 when any mode is vulnerable");
  det->add_flag("--dump-subspaces", cfg.dump_subspaces, "include subspace bases in the report");

  auto* ident = app.add_subcommand("identifiability", "pairwise discernibility");
  add_common(ident, true);
  ident->add_option("--modes", cfg.modes, "mode set (default: all)")->delimiter(',');
  ident->add_option("--convention", cfg.convention, "initial-state convention: zero or free")
      ->check(CLI::IsMember({"zero", "free"}));
  ident->add_flag("--strict", cfg.strict, "exit 2 when not identifiable");

  auto* syn = app.add_subcommand("synth", "synthesize a stealthy attack plan");
  add_common(syn, true);
  syn->add_option("--mode", cfg.mode, "attack mode");
  syn->add_option("--budget", cfg.budget, "stealth budget on ||y|| for eigenvalue plans (default 1e-3)");

  auto* sim = app.add_subcommand("simulate", "simulate the lifted deviation system");
  add_common(sim, true);
  sim->add_option("--mode", cfg.mode, "attack mode (default: plan's mode or none)");
  sim->add_option("--plan", cfg.plan_path, "attack plan JSON from synth");
  sim->add_option("--horizon", cfg.horizon, "frames to simulate (default 100)");
  sim->add_option("--noise", cfg.noise, "noise ball radius per frame (default 0)");
  sim->add_option("--seed", cfg.seed, "noise seed (default 7)");

  auto* thr = app.add_subcommand("thresholds", "alarm threshold and severity bound");
  add_common(thr, true);
  thr->add_option("--mode", cfg.mode, "attack mode (default: all)");
  thr->add_option("--horizon", cfg.horizon, "impulse-response truncation horizon (default 200)");
  thr->add_option("--noise", cfg.noise, "noise bound per frame (default 1)");
  thr->add_flag("--strict", cfg.strict, "exit 2 when any mode is vulnerable");

  auto* uas = app.add_subcommand("uas-demo", "run the UAS experiments");
  uas->add_option("--out", cfg.out, "output directory (default uas_out)");
  uas->add_option("--seed", cfg.seed, "seed (default 7)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*lift_cmd) return cmd_lift(cfg);
    if (*det) return cmd_detectability(cfg);
    if (*ident) return cmd_identifiability(cfg);
    if (*syn) return cmd_synth(cfg);
    if (*sim) return cmd_simulate(cfg);
    if (*thr) return cmd_thresholds(cfg);
    if (*uas) return cmd_uas_demo(cfg);
  } catch (const FormatError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
  } catch (const DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
  } catch (const UnstableModelError& e) {
    std::cerr << "unstable model: " << e.what() << " (use --allow-unstable to override)\n";
  } catch (const ThresholdError& e) {
    std::cerr << "threshold error: " << e.what() << "\n";
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace liftguard::cli
