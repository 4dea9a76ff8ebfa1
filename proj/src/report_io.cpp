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

#include "liftguard/report_io.hpp"

#include "liftguard/errors.hpp"

namespace liftguard {

namespace {

Json complex_to_json(std::complex<double> z) { return Json::array({z.real(), z.imag()}); }

const Json& field(const Json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("plan: missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

Json shaped_matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", matrix_to_json(m)}};
}

Matrix shaped_matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_object()) throw FormatError(what + ": expected {rows, cols, data}");
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  if (rows == 0 || cols == 0) return Matrix(rows, cols);
  Matrix m = matrix_from_json(j.at("data"), what);
  if (m.rows() != rows || m.cols() != cols) throw FormatError(what + ": shape does not match data");
  return m;
}

Json subspace_to_json(const Subspace& s) {
  return {{"dim", s.dim()}, {"ambient_dim", s.ambient_dim()}, {"basis", shaped_matrix_to_json(s.basis())}};
}

Json report_to_json(const DetectabilityReport& r, bool dump_subspaces) {
  Json j;
  j["mode"] = r.mode;
  j["verdict"] = to_string(r.verdict);
  j["condition"] = to_string(r.condition);
  j["dim_v"] = r.v.dim();
  j["dim_controllable"] = r.controllable.dim();
  j["dim_v_star"] = r.v_star.dim();
  j["friend"] = {{"m", shaped_matrix_to_json(r.friend_used.m)}, {"n", shaped_matrix_to_json(r.friend_used.n)}};
  if (r.witness_i) j["witness"] = {{"kernel_direction", vector_to_json(*r.witness_i)}};
  if (r.witness_ii) {
    j["witness"] = {{"block", r.witness_ii->block},
                    {"column", r.witness_ii->column},
                    {"severity_frame", r.witness_ii->severity_frame()},
                    {"value", vector_to_json(r.witness_ii->value)}};
  }
  if (r.witness_iii) {
    const auto& w = *r.witness_iii;
    j["witness"] = {{"lambda", complex_to_json(w.lambda)},
                    {"is_complex", w.is_complex},
                    {"jordan_size", w.jordan_size},
                    {"i_star", w.i_star},
                    {"closed_loop_residual", w.closed_loop_residual},
                    {"low_confidence", w.low_confidence},
                    {"chain", shaped_matrix_to_json(w.chain)},
                    {"eta", shaped_matrix_to_json(w.eta)}};
  }
  Json eigs = Json::array();
  for (const auto& e : r.eigs) {
    eigs.push_back({{"lambda", complex_to_json(e.lambda)},
                    {"multiplicity", e.multiplicity},
                    {"geometric", e.geometric},
                    {"jordan_size", e.jordan_size},
                    {"controllable", e.controllable},
                    {"unstable", e.unstable},
                    {"borderline", e.borderline},
                    {"low_confidence", e.low_confidence}});
  }
  j["restricted_eigenvalues"] = std::move(eigs);
  j["flags"] = r.flags;
  if (dump_subspaces) {
    j["subspaces"] = {{"v", subspace_to_json(r.v)},
                      {"controllable", subspace_to_json(r.controllable)},
                      {"v_star", subspace_to_json(r.v_star)},
                      {"a_restricted", shaped_matrix_to_json(r.map.a_restricted)}};
  }
  return j;
}

Json thresholds_to_json(const Thresholds& t) {
  const SeverityBound& s = t.severity;
  return {{"epsilon", t.epsilon},
          {"delta", t.delta},
          {"delta_noise", t.delta_noise},
          {"delta_attack", t.delta_attack},
          {"truncation_horizon", t.truncation_horizon},
          {"tail_bound_y", t.tail_bound},
          {"tail_bound_z", t.tail_bound_z},
          {"noise_gain_y", t.noise_gain_y},
          {"noise_gain_z", t.noise_gain_z},
          {"noise_bound", t.options.noise_bound},
          {"margin", t.options.margin},
          {"severity_bound",
           {{"gain", s.gain},
            {"sigma_plus", s.sigma_plus},
            {"eps1_gain", s.eps1_gain},
            {"eps2_gain", s.eps2_gain},
            {"stack_gain", s.stack_gain},
            {"kappa_b", s.kappa_b},
            {"kappa_f", s.kappa_f},
            {"stable_sum", s.stable_sum},
            {"flags", s.flags}}}};
}

Json plan_to_json(const AttackPlan& p) {
  Json j;
  j["kind"] = to_string(p.kind);
  j["period"] = p.period;
  j["attack_dim"] = p.attack_dim;
  j["alpha"] = p.alpha;
  j["kernel_input"] = vector_to_json(p.kernel_input);
  j["m"] = shaped_matrix_to_json(p.m);
  j["n"] = shaped_matrix_to_json(p.n_mat);
  j["impulse"] = vector_to_json(p.impulse);
  Json pre = Json::array();
  for (std::size_t c = 0; c < p.prelude_inputs.size(); ++c) {
    Json in = Json::array(), st = Json::array();
    for (const auto& v : p.prelude_inputs[c]) in.push_back(vector_to_json(v));
    for (const auto& v : p.prelude_states[c]) st.push_back(vector_to_json(v));
    pre.push_back({{"inputs", std::move(in)}, {"states", std::move(st)}});
  }
  j["preludes"] = std::move(pre);
  j["rotation"] = shaped_matrix_to_json(p.rotation);
  j["target_state"] = vector_to_json(p.target_state);
  j["certificate"] = {{"stealth_bound", p.certificate.stealth_bound},
                      {"law", to_string(p.certificate.law)},
                      {"rate", p.certificate.rate},
                      {"onset_frame", p.certificate.onset_frame},
                      {"eta_norm", p.certificate.eta_norm}};
  return j;
}

AttackPlan plan_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("plan: expected an object");
  AttackPlan p;
  try {
    p.kind = plan_kind_from_string(field(j, "kind").get<std::string>());
    p.period = field(j, "period").get<int>();
    p.attack_dim = field(j, "attack_dim").get<Eigen::Index>();
    p.alpha = field(j, "alpha").get<double>();
    p.kernel_input = vector_from_json(field(j, "kernel_input"), "plan.kernel_input");
    p.m = shaped_matrix_from_json(field(j, "m"), "plan.m");
    p.n_mat = shaped_matrix_from_json(field(j, "n"), "plan.n");
    p.impulse = vector_from_json(field(j, "impulse"), "plan.impulse");
    for (const auto& leg : field(j, "preludes")) {
      std::vector<Vector> in, st;
      for (const auto& v : leg.at("inputs")) in.push_back(vector_from_json(v, "plan.preludes.inputs"));
      for (const auto& v : leg.at("states")) st.push_back(vector_from_json(v, "plan.preludes.states"));
      p.prelude_inputs.push_back(std::move(in));
      p.prelude_states.push_back(std::move(st));
    }
    p.rotation = shaped_matrix_from_json(field(j, "rotation"), "plan.rotation");
    p.target_state = vector_from_json(field(j, "target_state"), "plan.target_state");
    const Json& c = field(j, "certificate");
    p.certificate.stealth_bound = c.at("stealth_bound").get<double>();
    p.certificate.law = growth_law_from_string(c.at("law").get<std::string>());
    p.certificate.rate = c.at("rate").get<double>();
    p.certificate.onset_frame = c.at("onset_frame").get<int>();
    p.certificate.eta_norm = c.at("eta_norm").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("plan: ") + e.what());
  }
  return p;
}

Json discernibility_to_json(const DiscernibilityVerdict& v) {
  return {{"p", v.p},
          {"q", v.q},
          {"convention", to_string(v.convention)},
          {"discernible", v.discernible},
          {"failed", v.failed},
          {"witness", vector_to_json(v.witness)},
          {"zero_initial_state", {{"discernible", v.zero_state_discernible}, {"failed", v.zero_state_failed}}},
          {"free_initial_state",
           {{"discernible", v.free_state_discernible},
            {"failed", v.free_state_failed},
            {"witness", vector_to_json(v.free_state_witness)}}},
          {"dim_v_pq", v.zero_state_report.v.dim()}};
}

Json identifiability_to_json(const IdentifiabilityResult& r) {
  Json pairs = Json::array();
  for (const auto& v : r.pairs) pairs.push_back(discernibility_to_json(v));
  return {{"modes", r.modes}, {"convention", to_string(r.convention)}, {"identifiable", r.identifiable},
          {"pairs", std::move(pairs)}};
}

Json history_summary_to_json(const IdentificationHistory& h) {
  Json j;
  j["modes"] = h.modes;
  j["final_modes"] = h.final_modes();
  j["windows"] = h.steps.size();
  j["first_frame"] = h.steps.empty() ? -1 : h.steps.front().frame;
  j["collapse_frame"] = h.collapse_frame ? *h.collapse_frame : -1;
  j["unmodeled_attack"] = h.unmodeled_attack_frame.has_value();
  if (h.unmodeled_attack_frame) j["unmodeled_attack_frame"] = *h.unmodeled_attack_frame;
  return j;
}

}  // namespace liftguard
