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

#include "liftguard/synth.hpp"

#include "liftguard/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace liftguard {

namespace {

Matrix power_by_squaring(Matrix base, long long k) {
  Matrix r = Matrix::Identity(base.rows(), base.cols());
  while (k > 0) {
    if (k & 1) r = r * base;
    base = base * base;
    k >>= 1;
  }
  return r;
}

DeviationSystem normalized(const DeviationSystem& s) {
  DeviationSystem c = s;
  c.normalize();
  return c;
}

}  // namespace

const char* to_string(PlanKind k) {
  switch (k) {
    case PlanKind::kernel_direction: return "kernel-direction";
    case PlanKind::nulling_policy: return "nulling-policy";
    case PlanKind::eig_case1: return "eig-case1";
    case PlanKind::eig_case2: return "eig-case2";
    case PlanKind::eig_case3: return "eig-case3";
  }
  return "unknown";
}

const char* to_string(GrowthLaw g) {
  switch (g) {
    case GrowthLaw::impulse: return "impulse";
    case GrowthLaw::geometric: return "geometric";
    case GrowthLaw::linear: return "linear";
  }
  return "unknown";
}

PlanKind plan_kind_from_string(const std::string& s) {
  for (PlanKind k : {PlanKind::kernel_direction, PlanKind::nulling_policy, PlanKind::eig_case1, PlanKind::eig_case2,
                     PlanKind::eig_case3}) {
    if (s == to_string(k)) return k;
  }
  throw FormatError("unknown plan kind '" + s + "'");
}

GrowthLaw growth_law_from_string(const std::string& s) {
  for (GrowthLaw g : {GrowthLaw::impulse, GrowthLaw::geometric, GrowthLaw::linear}) {
    if (s == to_string(g)) return g;
  }
  throw FormatError("unknown growth law '" + s + "'");
}

Vector AttackPlan::input(int k, const Vector& x) const {
  switch (kind) {
    case PlanKind::kernel_direction:
      return k == 0 ? kernel_input : Vector::Zero(attack_dim);
    case PlanKind::nulling_policy: {
      Vector a = m * x;
      if (k == 0 && n_mat.cols() > 0) a += n_mat * impulse;
      return a;
    }
    case PlanKind::eig_case1:
    case PlanKind::eig_case2:
      if (k < period) return alpha * prelude_inputs[0][static_cast<std::size_t>(k)];
      return m * x;
    case PlanKind::eig_case3: {
      const long long kt = k / period;
      const std::size_t j = static_cast<std::size_t>(k % period);
      const Vector coeff = alpha * power_by_squaring(rotation, kt).col(0);
      Vector a = m * x;
      for (std::size_t c = 0; c < prelude_inputs.size(); ++c) {
        a += coeff(static_cast<Eigen::Index>(c)) * (prelude_inputs[c][j] - m * prelude_states[c][j]);
      }
      return a;
    }
  }
  return Vector::Zero(attack_dim);
}

InputSource AttackPlan::source() const {
  return [plan = *this](int k, const Vector& x) { return plan.input(k, x); };
}

AttackPlan AttackPlan::scaled(double factor) const {
  AttackPlan p = *this;
  switch (kind) {
    case PlanKind::kernel_direction:
      p.kernel_input *= factor;
      break;
    case PlanKind::nulling_policy:
      p.impulse *= factor;
      break;
    default:
      p.alpha *= factor;
      p.target_state *= factor;
      break;
  }
  p.certificate.stealth_bound *= std::abs(factor);
  if (p.certificate.law != GrowthLaw::geometric) p.certificate.rate *= std::abs(factor);
  return p;
}

SteeringResult steer(const DeviationSystem& sys_in, const Vector& target, int frames, double input_weight,
                     double ramp_weight) {
  const DeviationSystem sys = normalized(sys_in);
  const Eigen::Index n = sys.state_dim();
  const Eigen::Index m = sys.attack_dim();
  const Eigen::Index p = sys.output_dim();
  if (target.size() != n) throw DimensionError("steer: target has the wrong dimension");
  SteeringResult res;
  if (frames <= 0 || m == 0) throw DimensionError("steer: need at least one frame and one attack channel");
  Matrix r(n, frames * m);
  const Eigen::Index pz = sys.severity_dim();
  Matrix g = Matrix::Zero(frames * p, frames * m);
  Matrix zm = Matrix::Zero(frames * pz, frames * m);
  std::vector<Matrix> ab(static_cast<std::size_t>(frames));  // A^k B
  ab[0] = sys.b;
  for (int k = 1; k < frames; ++k) ab[static_cast<std::size_t>(k)] = sys.a * ab[static_cast<std::size_t>(k - 1)];
  for (int i = 0; i < frames; ++i) r.middleCols(i * m, m) = ab[static_cast<std::size_t>(frames - 1 - i)];
  for (int j = 0; j < frames; ++j) {
    g.block(j * p, j * m, p, m) = sys.d;
    zm.block(j * pz, j * m, pz, m) = sys.f;
    for (int i = 0; i < j; ++i) {
      g.block(j * p, i * m, p, m) = sys.c * ab[static_cast<std::size_t>(j - 1 - i)];
      zm.block(j * pz, i * m, pz, m) = sys.e * ab[static_cast<std::size_t>(j - 1 - i)];
    }
  }
  Vector u = pinv(r, 1e-12) * target;
  const Subspace z = null_space(r, 1e-12);
  if (z.dim() > 0 && p > 0) {
    const double gn = std::max(1.0, spectral_norm(g));
    const double rho = std::sqrt(input_weight) * gn;
    Matrix lhs = vstack(g * z.basis(), rho * z.basis());
    Vector rhs = -vstack(g * u, rho * u);
    if (ramp_weight > 0.0 && pz > 0) {
      // Track z_j = (j / frames) E target so repeated preludes stack smoothly.
      Vector ramp(frames * pz);
      for (int j = 0; j < frames; ++j) ramp.segment(j * pz, pz) = (double(j) / frames) * (sys.e * target);
      const double sigma = std::sqrt(ramp_weight) * gn / std::max(1e-300, spectral_norm(zm));
      lhs = vstack(lhs, sigma * zm * z.basis());
      rhs = vstack(rhs, sigma * (ramp - zm * u));
    }
    const Vector c = lhs.colPivHouseholderQr().solve(rhs);
    u += z.basis() * c;
  }
  Vector x = Vector::Zero(n);
  for (int k = 0; k < frames; ++k) {
    const Vector a = u.segment(k * m, m);
    res.states.push_back(x);
    res.inputs.push_back(a);
    res.outputs.push_back(sys.c * x + sys.d * a);
    x = sys.a * x + sys.b * a;
  }
  res.final_state = x;
  res.steering_error = (x - target).norm() / std::max(target.norm(), 1e-300);
  return res;
}

AttackPlan synth_condition_i(const DeviationSystem& sys_in, const Vector& v, double target, const Tolerances& tol) {
  const DeviationSystem sys = normalized(sys_in);
  const double fv = (sys.f * v).norm();
  if (fv <= tol.residual * std::max(1.0, spectral_norm(sys.f))) {
    throw NumericalError("condition (i) witness is degenerate: F v vanishes");
  }
  AttackPlan plan;
  plan.kind = PlanKind::kernel_direction;
  plan.period = static_cast<int>(sys.state_dim());
  plan.attack_dim = sys.attack_dim();
  plan.kernel_input = (target / fv) * v;
  plan.certificate.stealth_bound = 0.0;
  plan.certificate.law = GrowthLaw::impulse;
  plan.certificate.rate = target;
  plan.certificate.onset_frame = 0;
  plan.certificate.eta_norm = fv;
  return plan;
}

AttackPlan synth_condition_ii(const DeviationSystem& sys_in, const Friend& fr, const ConditionIIWitness& w,
                              double target, const Tolerances& tol) {
  const DeviationSystem sys = normalized(sys_in);
  const double lc = w.value.norm();
  if (lc <= 0.0) throw NumericalError("condition (ii) witness column is zero");
  if (w.column < 0 || w.column >= fr.n.cols()) throw DimensionError("condition (ii) witness column out of range");
  (void)tol;
  AttackPlan plan;
  plan.kind = PlanKind::nulling_policy;
  plan.period = static_cast<int>(sys.state_dim());
  plan.attack_dim = sys.attack_dim();
  plan.m = fr.m;
  plan.n_mat = fr.n;
  plan.impulse = Vector::Zero(fr.n.cols());
  plan.impulse(w.column) = target / lc;
  plan.certificate.stealth_bound = 0.0;
  plan.certificate.law = GrowthLaw::impulse;
  plan.certificate.rate = target;
  plan.certificate.onset_frame = w.severity_frame();
  plan.certificate.eta_norm = lc;
  return plan;
}

AttackPlan synth_condition_iii(const DeviationSystem& sys_in, const Friend& fr, const ConditionIIIWitness& w,
                               const Matrix& v_star, double budget, const SynthOptions& opt, const Tolerances& tol) {
  const DeviationSystem sys = normalized(sys_in);
  (void)fr;
  const int n = static_cast<int>(sys.state_dim());
  const int per_pos = w.is_complex ? 2 : 1;
  const int positions = static_cast<int>(w.chain.cols()) / per_pos;
  const double mag = std::abs(w.lambda);
  if (w.i_star >= positions) throw NumericalError("condition (iii) witness has no escaping chain position");

  AttackPlan plan;
  plan.period = n;
  plan.attack_dim = sys.attack_dim();
  plan.m = w.m_with_gain;
  std::vector<Vector> targets;
  const auto part_escape = [&](int col) { return w.eta.col(col).norm(); };
  const int base = w.i_star * per_pos;
  if (mag > 1.0 + tol.unit_band) {
    plan.kind = PlanKind::eig_case1;
    const int col = (w.is_complex && part_escape(base + 1) > part_escape(base)) ? base + 1 : base;
    targets.push_back(v_star * w.chain.col(col));
  } else if (w.i_star + 1 < positions) {
    plan.kind = PlanKind::eig_case2;
    targets.push_back(v_star * w.chain.col(base + per_pos));
  } else {
    plan.kind = PlanKind::eig_case3;
    for (int c = 0; c < per_pos; ++c) targets.push_back(v_star * w.chain.col(base + c));
    Matrix lam = w.is_complex ? real_jordan_block(w.lambda, 1, true) : Matrix::Constant(1, 1, w.lambda.real());
    plan.rotation = power_by_squaring(lam, n);
  }

  double worst = 0.0;
  std::vector<SteeringResult> legs;
  for (const auto& t : targets) {
    legs.push_back(steer(sys, t, n, opt.input_weight, opt.ramp_weight));
    if (legs.back().steering_error > 1e-8) {
      std::ostringstream os;
      os << "prelude steering error " << legs.back().steering_error << " exceeds 1e-8";
      throw NumericalError(os.str());
    }
  }
  for (int j = 0; j < n; ++j) {
    Matrix y(sys.output_dim(), static_cast<Eigen::Index>(legs.size()));
    for (std::size_t c = 0; c < legs.size(); ++c) y.col(static_cast<Eigen::Index>(c)) = legs[c].outputs[static_cast<std::size_t>(j)];
    worst = std::max(worst, spectral_norm(y));
  }
  if (!(budget > 0.0)) throw NumericalError("stealth budget must be positive");
  plan.alpha = worst > 0.0 ? budget / worst : 1.0;
  if (!(plan.alpha > 1e-300) || !std::isfinite(plan.alpha)) {
    throw NumericalError("stealth budget too small to admit a usable attack scale");
  }
  for (const auto& leg : legs) {
    plan.prelude_inputs.push_back(leg.inputs);
    plan.prelude_states.push_back(leg.states);
  }
  plan.target_state = plan.alpha * targets.front();

  PlanCertificate& cert = plan.certificate;
  cert.stealth_bound = worst > 0.0 ? budget : 0.0;
  cert.onset_frame = n;
  cert.eta_norm = w.eta.middleCols(base, per_pos).norm();
  switch (plan.kind) {
    case PlanKind::eig_case1:
      cert.law = GrowthLaw::geometric;
      cert.rate = mag;
      break;
    case PlanKind::eig_case2:
      cert.law = GrowthLaw::linear;
      cert.rate = plan.alpha * cert.eta_norm;
      break;
    default:
      cert.law = GrowthLaw::linear;
      cert.rate = plan.alpha * cert.eta_norm / static_cast<double>(n);
      break;
  }
  return plan;
}

AttackPlan synthesize(const DeviationSystem& sys, const DetectabilityReport& rep, const SynthOptions& opt) {
  switch (rep.condition) {
    case Condition::i:
      return synth_condition_i(sys, *rep.witness_i, opt.target_severity, rep.tol);
    case Condition::ii:
      return synth_condition_ii(sys, rep.friend_used, *rep.witness_ii, opt.target_severity, rep.tol);
    case Condition::iii:
      return synth_condition_iii(sys, rep.friend_used, *rep.witness_iii, rep.map.v_star, opt.stealth_budget, opt,
                                 rep.tol);
    default:
      throw Error("no attack to synthesize: mode is detectable");
  }
}

}  // namespace liftguard
