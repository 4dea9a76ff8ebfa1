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

// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fails.

#include "criteria.hpp"

#include <cstdio>

using namespace liftguard;
using namespace liftguard::testing;

int main() {
  const UasScenario s = uas_scenario();
  const std::vector<std::pair<std::string, std::function<CriterionResult()>>> checks = {
      {"friend recovery on the per-step GPS loop", [&] { return criterion_friend(s); }},
      {"per-step GPS spoofing is undetectable via a unit zero", [&] { return criterion_verdict(s); }},
      {"synthesized per-step attack stays stealthy while severity ramps", [&] { return criterion_stealthy_attack(s); }},
      {"lifted schedule detects; noise runs stay quiet", [&] { return criterion_lifted_detection(s); }},
      {"attacked mode identified from the residual bank", [&] { return criterion_identification(s); }},
      {"output-nulling subspace matches the stacked oracle", [] { return criterion_nulling_oracle(); }},
      {"structural lemma properties on random instances", [] { return criterion_lemmas(); }},
      {"verdict soundness loop", [] { return criterion_soundness(); }},
      {"lifting exactness", [] { return criterion_lifting(); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = checks[i].second();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (i == 7 && secs > 300.0) {
      r.pass = false;
      r.detail += " (over the 5 minute budget)";
    }
    failed += !r.pass;
    std::printf("%s criterion %zu: %s [%.2fs] %s\n", r.pass ? "PASS" : "FAIL", i + 1, checks[i].first.c_str(), secs,
                r.detail.c_str());
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
