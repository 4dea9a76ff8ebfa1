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

// Replay of synthesized plans and the randomized verdict soundness loop
// shared by the synth tests and the acceptance binary.

#include "test_support.hpp"

#include "liftguard/detect.hpp"
#include "liftguard/kernels.hpp"
#include "liftguard/synth.hpp"

#include <cmath>

namespace liftguard::testing {

struct Replay {
  double max_output = 0.0;
  double max_severity = 0.0;
  int frames = 0;
  int severity_frame = -1;  // first frame with ||z|| >= goal
};

// Runs the plan from rest until ||z|| reaches `goal` or `cap` frames pass.
inline Replay replay(const DeviationSystem& sys, const AttackPlan& plan, double goal, int cap) {
  Replay r;
  Vector x = Vector::Zero(sys.state_dim());
  for (int k = 0; k < cap; ++k) {
    const Vector a = plan.input(k, x);
    r.max_output = std::max(r.max_output, (sys.c * x + sys.d * a).norm());
    const double z = (sys.e * x + sys.f * a).norm();
    r.max_severity = std::max(r.max_severity, z);
    r.frames = k + 1;
    if (z >= goal) {
      r.severity_frame = k;
      break;
    }
    x = sys.a * x + sys.b * a;
  }
  return r;
}

// Frames a plan needs to reach `goal`, from its certificate, plus slack.
inline int frames_needed(const AttackPlan& plan, double goal, int cap) {
  const PlanCertificate& c = plan.certificate;
  double need = 4.0 * plan.period + 4.0;
  switch (c.law) {
    case GrowthLaw::impulse:
      need += c.onset_frame;
      break;
    case GrowthLaw::geometric:
      need += std::log(goal / std::max(1e-300, c.stealth_bound * 1e-3)) / std::log(std::max(1.0 + 1e-12, c.rate));
      break;
    case GrowthLaw::linear:
      need += 4.0 * goal / std::max(1e-300, c.rate);
      break;
  }
  if (!std::isfinite(need)) return cap;
  return static_cast<int>(std::min<double>(cap, std::ceil(need)));
}

inline DeviationSystem soundness_system(std::mt19937_64& rng) {
  const int n = uniform_int(rng, 1, 4);
  if (uniform_int(rng, 0, 3) == 0) {
    // Occasional planted invisible input: one attack column hits only F.
    DeviationSystem s = random_system(rng, n, 2, 1, 1, 0.8);
    s.b.col(1).setZero();
    s.d.col(1).setZero();
    return s;
  }
  DeviationSystem s = random_nulling_system(rng, n);
  s.a = random_stable(rng, n, std::uniform_real_distribution<double>(0.3, 0.95)(rng));
  return s;
}

struct SoundnessSummary {
  int vulnerable = 0, detectable = 0;
  int vulnerable_failed = 0, detectable_failed = 0;
  double worst_stealth = 0.0;    // over vulnerable plans
  double worst_ratio_gap = 0.0;  // max(found ratio / certified gain) over detectable
  std::vector<std::string> failures;
};

inline SoundnessSummary soundness_loop(std::uint64_t seed, int instances, int policies, double goal = 10.0,
                                       double budget = 1e-3) {
  std::mt19937_64 rng(seed);
  SoundnessSummary out;
  for (int t = 0; t < instances; ++t) {
    const DeviationSystem s = soundness_system(rng);
    const DetectabilityReport r = analyze_detectability(s);
    if (r.vulnerable()) {
      ++out.vulnerable;
      SynthOptions opt;
      opt.target_severity = goal;
      opt.stealth_budget = budget;
      const AttackPlan plan = synthesize(s, r, opt);
      const Replay rp = replay(s, plan, goal * (1 - 1e-9), frames_needed(plan, goal, 400000));
      out.worst_stealth = std::max(out.worst_stealth, rp.max_output);
      if (rp.severity_frame < 0 || rp.max_output > budget * (1 + 1e-9)) {
        ++out.vulnerable_failed;
        out.failures.push_back("instance " + std::to_string(t) + " (" + to_string(plan.kind) +
                               "): severity " + std::to_string(rp.max_severity) + " stealth " +
                               std::to_string(rp.max_output));
      }
    } else {
      ++out.detectable;
      const SeverityBound sb = severity_bound(s, r);
      const auto res = kernels::stealth_search(s, r.friend_used, policies, 3 * static_cast<int>(s.state_dim()) + 6,
                                               2 * static_cast<int>(s.state_dim()) + 2, seed * 7919 + t);
      const double gap = sb.gain > 0 ? res.worst_ratio / sb.gain : (res.worst_ratio > 0 ? 1e300 : 0.0);
      out.worst_ratio_gap = std::max(out.worst_ratio_gap, gap);
      if (res.worst_ratio > sb.gain * (1 + 1e-9)) {
        ++out.detectable_failed;
        out.failures.push_back("instance " + std::to_string(t) + ": search ratio " +
                               std::to_string(res.worst_ratio) + " exceeds gain " + std::to_string(sb.gain));
      }
    }
  }
  return out;
}

}  // namespace liftguard::testing
