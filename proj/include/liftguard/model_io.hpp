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

#include "json.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace liftguard {

using Json = nlohmann::ordered_json;

Json matrix_to_json(const Matrix& m);
// Row-major nested arrays; `what` names the field in error messages.
Matrix matrix_from_json(const Json& j, const std::string& what);
Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& what);

struct ModelDocument {
  NominalModel model;
  std::optional<SensorSchedule> schedule;
};

// Unknown keys are rejected. Missing optional matrices default to
// zero-size blocks of the right shape.
ModelDocument model_from_json(const Json& j, bool strict = true);
Json model_to_json(const NominalModel& model, const SensorSchedule* schedule = nullptr);
SensorSchedule schedule_from_json(const Json& j, const NominalModel& model);
Json schedule_to_json(const SensorSchedule& schedule, const NominalModel& model);

ModelDocument load_model(const std::string& path, bool strict = true);
SensorSchedule load_schedule(const std::string& path, const NominalModel& model);
void save_model(const std::string& path, const NominalModel& model, const SensorSchedule* schedule = nullptr);
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

Json lifted_to_json(const LiftedPlant& plant);

// Shortest representation that round-trips.
std::string format_double(double v);

// Header: frame, then x/y/z/a/w components. Column names follow the lifted
// row layout when `plant` is given.
void write_trace_csv(std::ostream& os, const SimulationTrace& trace, const LiftedPlant* plant = nullptr);

}  // namespace liftguard
