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
#include "liftguard/model_io.hpp"
#include "liftguard/synth.hpp"

namespace liftguard {

// Matrices that may have a zero dimension are written with an explicit shape.
Json shaped_matrix_to_json(const Matrix& m);
Matrix shaped_matrix_from_json(const Json& j, const std::string& what);

Json subspace_to_json(const Subspace& s);
Json report_to_json(const DetectabilityReport& report, bool dump_subspaces = false);
Json thresholds_to_json(const Thresholds& t);
Json plan_to_json(const AttackPlan& plan);
AttackPlan plan_from_json(const Json& j);
Json discernibility_to_json(const DiscernibilityVerdict& v);
Json identifiability_to_json(const IdentifiabilityResult& r);
Json history_summary_to_json(const IdentificationHistory& h);

}  // namespace liftguard
