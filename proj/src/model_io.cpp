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

#include "liftguard/model_io.hpp"

#include "liftguard/errors.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace liftguard {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw FormatError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw FormatError(where + ": unknown field '" + it.key() + "'");
  }
}

// Missing or zero-size entries become zeros of the expected shape.
Matrix matrix_field(const Json& j, const std::string& key, Eigen::Index rows, Eigen::Index cols,
                    const std::string& where) {
  if (!j.contains(key)) return Matrix::Zero(rows, cols);
  Matrix m = matrix_from_json(j.at(key), where + "." + key);
  if (m.size() == 0 && rows * cols == 0) return Matrix::Zero(rows, cols);
  return m;
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + ": expected a nested array");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  if (!j[0].is_array()) throw FormatError(what + ": expected rows as arrays");
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw FormatError(what + ": ragged row " + std::to_string(i));
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      const Json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw FormatError(what + ": non-numeric entry at (" + std::to_string(i) + "," + std::to_string(k) + ")");
      m(i, k) = v.get<double>();
    }
  }
  return m;
}

Json vector_to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw FormatError(what + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError(what + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

ModelDocument model_from_json(const Json& j, bool strict) {
  reject_unknown(j, {"a_hat", "b_u_hat", "b_w", "e_hat", "sensors", "modes", "schedule"}, "model");
  if (!j.contains("a_hat")) throw FormatError("model: missing a_hat");
  if (!j.contains("sensors")) throw FormatError("model: missing sensors");
  ModelDocument doc;
  NominalModel& m = doc.model;
  m.a_hat = matrix_from_json(j.at("a_hat"), "model.a_hat");
  const Eigen::Index n = m.a_hat.rows();
  m.b_u_hat = matrix_field(j, "b_u_hat", n, 0, "model");
  m.b_w = matrix_field(j, "b_w", n, 0, "model");
  m.e_hat = matrix_field(j, "e_hat", 0, n, "model");
  if (!j.at("sensors").is_array()) throw FormatError("model.sensors: expected an array");
  for (const auto& sj : j.at("sensors")) {
    reject_unknown(sj, {"name", "c", "d_u", "d_w"}, "sensor");
    SensorSpec s;
    if (!sj.contains("name") || !sj.at("name").is_string()) throw FormatError("sensor: missing name");
    s.name = sj.at("name").get<std::string>();
    if (!sj.contains("c")) throw FormatError("sensor '" + s.name + "': missing c");
    const std::string where = "sensor '" + s.name + "'";
    s.c = matrix_from_json(sj.at("c"), where + ".c");
    if (s.c.size() == 0) s.c = Matrix::Zero(0, n);
    s.d_u = matrix_field(sj, "d_u", s.c.rows(), m.b_u_hat.cols(), where);
    s.d_w = matrix_field(sj, "d_w", s.c.rows(), m.b_w.cols(), where);
    m.sensors.push_back(std::move(s));
  }
  if (j.contains("modes")) {
    if (!j.at("modes").is_array()) throw FormatError("model.modes: expected an array");
    for (const auto& mj : j.at("modes")) {
      reject_unknown(mj, {"id", "b_a", "d_a"}, "mode");
      AttackMode mode;
      if (!mj.contains("id") || !mj.at("id").is_string()) throw FormatError("mode: missing id");
      mode.id = mj.at("id").get<std::string>();
      const std::string where = "mode '" + mode.id + "'";
      if (!mj.contains("b_a")) throw FormatError(where + ": missing b_a");
      mode.b_a = matrix_from_json(mj.at("b_a"), where + ".b_a");
      if (mode.b_a.size() == 0) mode.b_a = Matrix::Zero(n, 0);
      if (mj.contains("d_a")) {
        const Json& dj = mj.at("d_a");
        if (!dj.is_object()) throw FormatError(where + ".d_a: expected an object keyed by sensor name");
        for (auto it = dj.begin(); it != dj.end(); ++it) {
          mode.d_a[it.key()] = matrix_from_json(it.value(), where + ".d_a." + it.key());
        }
      }
      m.modes.push_back(std::move(mode));
    }
  }
  m.validate(strict);
  if (j.contains("schedule")) doc.schedule = schedule_from_json(j.at("schedule"), m);
  return doc;
}

Json model_to_json(const NominalModel& m, const SensorSchedule* schedule) {
  Json j;
  j["a_hat"] = matrix_to_json(m.a_hat);
  j["b_u_hat"] = matrix_to_json(m.b_u_hat);
  j["b_w"] = matrix_to_json(m.b_w);
  j["e_hat"] = matrix_to_json(m.e_hat);
  Json sensors = Json::array();
  for (const auto& s : m.sensors) {
    Json sj;
    sj["name"] = s.name;
    sj["c"] = matrix_to_json(s.c);
    sj["d_u"] = matrix_to_json(s.d_u);
    sj["d_w"] = matrix_to_json(s.d_w);
    sensors.push_back(std::move(sj));
  }
  j["sensors"] = std::move(sensors);
  Json modes = Json::array();
  for (const auto& mode : m.modes) {
    Json mj;
    mj["id"] = mode.id;
    mj["b_a"] = matrix_to_json(mode.b_a);
    Json d = Json::object();
    for (const auto& [name, mat] : mode.d_a) d[name] = matrix_to_json(mat);
    mj["d_a"] = std::move(d);
    modes.push_back(std::move(mj));
  }
  j["modes"] = std::move(modes);
  if (schedule) j["schedule"] = schedule_to_json(*schedule, m);
  return j;
}

SensorSchedule schedule_from_json(const Json& j, const NominalModel& model) {
  reject_unknown(j, {"frame_period", "samples"}, "schedule");
  SensorSchedule s;
  if (!j.contains("frame_period") || !j.at("frame_period").is_number_integer()) {
    throw FormatError("schedule: frame_period must be an integer");
  }
  s.frame_period = j.at("frame_period").get<int>();
  s.samples.assign(model.sensors.size(), {});
  if (!j.contains("samples") || !j.at("samples").is_object()) {
    throw FormatError("schedule: samples must be an object keyed by sensor name");
  }
  const Json& sj = j.at("samples");
  for (auto it = sj.begin(); it != sj.end(); ++it) {
    const int idx = model.sensor_index(it.key());
    if (idx < 0) throw FormatError("schedule: unknown sensor '" + it.key() + "'");
    if (!it.value().is_array()) throw FormatError("schedule: offsets for '" + it.key() + "' must be an array");
    for (const auto& v : it.value()) {
      if (!v.is_number_integer()) throw FormatError("schedule: offsets must be integers");
      s.samples[static_cast<std::size_t>(idx)].push_back(v.get<int>());
    }
  }
  s.validate(model.sensors.size());
  return s;
}

Json schedule_to_json(const SensorSchedule& s, const NominalModel& model) {
  Json j;
  j["frame_period"] = s.frame_period;
  Json samples = Json::object();
  for (std::size_t i = 0; i < model.sensors.size() && i < s.samples.size(); ++i) {
    samples[model.sensors[i].name] = s.samples[i];
  }
  j["samples"] = std::move(samples);
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

ModelDocument load_model(const std::string& path, bool strict) {
  return model_from_json(read_json_file(path), strict);
}

SensorSchedule load_schedule(const std::string& path, const NominalModel& model) {
  return schedule_from_json(read_json_file(path), model);
}

void save_model(const std::string& path, const NominalModel& model, const SensorSchedule* schedule) {
  write_json_file(path, model_to_json(model, schedule));
}

Json lifted_to_json(const LiftedPlant& p) {
  Json j;
  j["frame_period"] = p.frame_period;
  j["a"] = matrix_to_json(p.a);
  j["b_u"] = matrix_to_json(p.b_u);
  j["c"] = matrix_to_json(p.c);
  j["d_u"] = matrix_to_json(p.d_u);
  j["b_w"] = matrix_to_json(p.b_w);
  j["d_w"] = matrix_to_json(p.d_w);
  j["e"] = matrix_to_json(p.e);
  j["f_w"] = matrix_to_json(p.f_w);
  Json rows = Json::array();
  for (const auto& r : p.rows) {
    rows.push_back({{"sensor", p.sensor_names[static_cast<std::size_t>(r.sensor)]},
                    {"offset", r.offset},
                    {"first_row", r.first_row},
                    {"rows", r.rows}});
  }
  j["output_rows"] = std::move(rows);
  Json modes = Json::object();
  for (const auto& id : p.mode_ids) {
    const auto& ch = p.channels(id);
    modes[id] = {{"b_a", matrix_to_json(ch.b_a)}, {"d_a", matrix_to_json(ch.d_a)}, {"f_a", matrix_to_json(ch.f_a)}};
  }
  j["modes"] = std::move(modes);
  return j;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& os, const SimulationTrace& tr, const LiftedPlant* plant) {
  const auto first = [&](const std::vector<Vector>& v) -> Eigen::Index { return v.empty() ? 0 : v.front().size(); };
  os << "frame";
  for (Eigen::Index i = 0; i < first(tr.x); ++i) os << ",x" << i;
  if (plant && plant->output_dim() == first(tr.y)) {
    for (const auto& r : plant->rows) {
      for (Eigen::Index i = 0; i < r.rows; ++i) {
        os << ",y_" << plant->sensor_names[static_cast<std::size_t>(r.sensor)] << "_t" << r.offset << "_" << i;
      }
    }
  } else {
    for (Eigen::Index i = 0; i < first(tr.y); ++i) os << ",y" << i;
  }
  const Eigen::Index pz = plant ? plant->step_severity_dim : 0;
  if (plant && pz > 0 && pz * plant->frame_period == first(tr.z)) {
    for (int t = 0; t < plant->frame_period; ++t) {
      for (Eigen::Index i = 0; i < pz; ++i) os << ",z_t" << t << "_" << i;
    }
  } else {
    for (Eigen::Index i = 0; i < first(tr.z); ++i) os << ",z" << i;
  }
  for (Eigen::Index i = 0; i < first(tr.a); ++i) os << ",a" << i;
  for (Eigen::Index i = 0; i < first(tr.w); ++i) os << ",w" << i;
  os << "\n";
  for (int k = 0; k < tr.frames(); ++k) {
    os << k;
    for (const auto* series : {&tr.x, &tr.y, &tr.z, &tr.a, &tr.w}) {
      const Vector& v = (*series)[static_cast<std::size_t>(k)];
      for (Eigen::Index i = 0; i < v.size(); ++i) os << "," << format_double(v(i));
    }
    os << "\n";
  }
}

}  // namespace liftguard
