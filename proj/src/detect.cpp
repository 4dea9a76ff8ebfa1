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

#include "liftguard/detect.hpp"

#include "liftguard/errors.hpp"
#include "liftguard/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace liftguard {

namespace {

DeviationSystem normalized(const DeviationSystem& s) {
  DeviationSystem c = s;
  c.normalize();
  return c;
}

// Removes leading chain positions that vanish; returns false if nothing is left.
bool strip_leading_zeros(Matrix& g, int per_pos, double thr) {
  int skip = 0;
  const int positions = static_cast<int>(g.cols()) / per_pos;
  while (skip < positions && g.middleCols(skip * per_pos, per_pos).norm() <= thr) ++skip;
  if (skip == positions) return false;
  if (skip > 0) g = Matrix(g.rightCols(g.cols() - skip * per_pos));
  return true;
}

}  // namespace

const char* to_string(Verdict v) { return v == Verdict::vulnerable ? "vulnerable" : "detectable"; }

const char* to_string(Condition c) {
  switch (c) {
    case Condition::i: return "i";
    case Condition::ii: return "ii";
    case Condition::iii: return "iii";
    default: return "none";
  }
}

int ConditionIIWitness::severity_frame() const { return block >= state_dim ? 0 : state_dim - block; }

std::optional<Vector> check_condition_i(const DeviationSystem& sys_in, const Tolerances& tol) {
  const DeviationSystem sys = normalized(sys_in);
  if (sys.attack_dim() == 0 || sys.severity_dim() == 0) return std::nullopt;
  const Subspace z = null_space(vstack(sys.b, sys.d), tol.rank);
  if (z.is_trivial()) return std::nullopt;
  const Matrix fz = sys.f * z.basis();
  if (fz.size() == 0) return std::nullopt;
  Eigen::JacobiSVD<Matrix> svd(fz, Eigen::ComputeFullV);
  const double scale = std::max(1.0, spectral_norm(vstack(vstack(sys.b, sys.d), sys.f)));
  if (svd.singularValues()(0) <= tol.residual * scale) return std::nullopt;
  Vector v = z.basis() * svd.matrixV().col(0);
  return Vector(v.normalized());
}

std::optional<ConditionIIWitness> check_condition_ii(const DeviationSystem& sys_in, const Friend& fr,
                                                     const Tolerances& tol) {
  const DeviationSystem sys = normalized(sys_in);
  if (fr.n.cols() == 0 || sys.severity_dim() == 0) return std::nullopt;
  verify_friend(fr, sys.a, sys.b, sys.c, sys.d, tol);
  const int n = static_cast<int>(sys.state_dim());
  const Matrix h = sys.e + sys.f * fr.m;
  const Matrix am = sys.a + sys.b * fr.m;
  const Matrix bn = sys.b * fr.n;
  const double thr = tol.residual * std::max(1.0, spectral_norm(h)) * std::max(1.0, spectral_norm(bn)) *
                     std::pow(std::max(1.0, spectral_norm(am)), n);
  // Blocks from the left: H A_M^{n-1} B N first, F N last.
  std::vector<Matrix> blocks(static_cast<std::size_t>(n + 1));
  Matrix p = bn;
  for (int b = n - 1; b >= 0; --b) {
    blocks[static_cast<std::size_t>(b)] = h * p;
    p = am * p;
  }
  blocks[static_cast<std::size_t>(n)] = sys.f * fr.n;
  for (int b = 0; b <= n; ++b) {
    const Matrix& blk = blocks[static_cast<std::size_t>(b)];
    for (Eigen::Index c = 0; c < blk.cols(); ++c) {
      if (blk.col(c).norm() > thr) {
        ConditionIIWitness w;
        w.block = b;
        w.column = static_cast<int>(c);
        w.value = blk.col(c);
        w.state_dim = n;
        return w;
      }
    }
  }
  return std::nullopt;
}

ConditionIIIResult check_condition_iii(const DeviationSystem& sys_in, const Friend& fr, const Tolerances& tol) {
  const DeviationSystem sys = normalized(sys_in);
  ConditionIIIResult res;
  res.controllable = controllable_subspace(sys.a, sys.b, tol.rank);
  res.v_star = intersect(fr.v, res.controllable, tol.rank);
  res.map = restrict_map(res.v_star, fr, sys.a, sys.b, tol);
  res.eigs = eig_structure(res.map, tol);
  for (const auto& e : res.eigs) {
    for (const auto& w : e.warnings) res.flags.push_back(w);
    if (e.borderline) res.flags.push_back("eigenvalue on the unit-circle borderline band");
  }
  if (res.v_star.is_trivial()) return res;
  const Matrix hfull = sys.e + sys.f * fr.m;
  const Matrix h = hfull * res.map.v_star;
  const double hthr = tol.residual * std::max(1.0, spectral_norm(hfull));
  const Matrix& ar = res.map.a_restricted;
  const Matrix& bn = res.map.b_n_restricted;

  for (const auto& e : res.eigs) {
    if (!e.unstable || e.controllable) continue;
    const int per_pos = e.is_complex ? 2 : 1;
    for (int s = 1; s <= e.multiplicity; ++s) {
      const ChainSolutions sol = eigenspace_assignment_solutions(res.map, e.lambda, s, e.is_complex, tol);
      if (sol.solutions.is_trivial()) continue;
      const Matrix& basis = sol.solutions.basis();
      // Candidates: each basis vector by escape size, then a generic combination.
      std::vector<std::pair<double, Vector>> cands;
      for (Eigen::Index k = 0; k < basis.cols(); ++k) {
        const Matrix g = sol.chain(basis.col(k));
        cands.emplace_back((h * g).norm(), basis.col(k));
      }
      std::stable_sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
      Vector mix = Vector::Zero(basis.rows());
      for (Eigen::Index k = 0; k < basis.cols(); ++k) mix += basis.col(k) / (1.0 + static_cast<double>(k));
      cands.emplace_back((h * sol.chain(mix)).norm(), mix);

      for (const auto& [escape, vec] : cands) {
        Matrix g = sol.chain(vec);
        g /= std::max(g.norm(), 1e-300);
        if ((h * g).norm() <= hthr) continue;
        if (!strip_leading_zeros(g, per_pos, 1e-8)) continue;
        if (numerical_rank(g, 1e-8) != g.cols()) continue;
        const int positions = static_cast<int>(g.cols()) / per_pos;
        ConditionIIIWitness w;
        w.lambda = e.lambda;
        w.is_complex = e.is_complex;
        w.jordan_size = positions;
        w.chain = g;
        w.j_block = real_jordan_block(e.lambda, positions, e.is_complex);
        if (bn.cols() > 0) {
          const Matrix x = pinv(bn, tol.rank) * (g * w.j_block - ar * g);
          w.gain = x * pinv(g, tol.rank);
        } else {
          w.gain = Matrix::Zero(0, ar.rows());
        }
        const Matrix closed = bn.cols() > 0 ? Matrix(ar + bn * w.gain) : ar;
        w.closed_loop_residual = (closed * g - g * w.j_block).norm();
        if (w.closed_loop_residual > 1e-6 * std::max(1.0, spectral_norm(ar))) continue;
        w.m_with_gain = fr.n.cols() > 0 ? Matrix(fr.m + fr.n * w.gain * res.map.v_star.transpose()) : fr.m;
        w.eta = h * g;
        w.i_star = 0;
        while (w.i_star < positions && w.eta.middleCols(w.i_star * per_pos, per_pos).norm() <= hthr) ++w.i_star;
        w.low_confidence = e.low_confidence;
        res.witness = std::move(w);
        return res;
      }
    }
  }
  return res;
}

std::optional<Vector> check_condition_i(const LiftedPlant& plant, const std::string& mode, const Tolerances& tol) {
  return check_condition_i(deviation_system(plant, mode), tol);
}

std::optional<ConditionIIWitness> check_condition_ii(const LiftedPlant& plant, const std::string& mode,
                                                     const Friend& fr, const Tolerances& tol) {
  return check_condition_ii(deviation_system(plant, mode), fr, tol);
}

ConditionIIIResult check_condition_iii(const LiftedPlant& plant, const std::string& mode, const Friend& fr,
                                       const Tolerances& tol) {
  return check_condition_iii(deviation_system(plant, mode), fr, tol);
}

DetectabilityReport analyze_detectability(const DeviationSystem& sys_in, const Tolerances& tol,
                                          const Friend* friend_override, const std::string& mode) {
  const DeviationSystem sys = normalized(sys_in);
  DetectabilityReport rep;
  rep.mode = mode;
  rep.tol = tol;
  rep.v = max_output_nulling(sys.a, sys.b, sys.c, sys.d, tol.rank);
  if (friend_override) {
    verify_friend(*friend_override, sys.a, sys.b, sys.c, sys.d, tol);
    rep.friend_used = *friend_override;
  } else {
    rep.friend_used = compute_friend(rep.v, sys.a, sys.b, sys.c, sys.d, tol);
  }
  if (auto w = check_condition_i(sys, tol)) {
    rep.verdict = Verdict::vulnerable;
    rep.condition = Condition::i;
    rep.witness_i = *w;
    return rep;
  }
  if (auto w = check_condition_ii(sys, rep.friend_used, tol)) {
    rep.verdict = Verdict::vulnerable;
    rep.condition = Condition::ii;
    rep.witness_ii = *w;
    return rep;
  }
  ConditionIIIResult r3 = check_condition_iii(sys, rep.friend_used, tol);
  rep.controllable = r3.controllable;
  rep.v_star = r3.v_star;
  rep.map = r3.map;
  rep.eigs = r3.eigs;
  rep.flags = r3.flags;
  if (r3.witness) {
    rep.verdict = Verdict::vulnerable;
    rep.condition = Condition::iii;
    if (r3.witness->low_confidence) rep.flags.push_back("condition (iii) witness built on a low-confidence eigenvalue");
    rep.witness_iii = std::move(r3.witness);
  }
  return rep;
}

DetectabilityReport analyze_detectability(const LiftedPlant& plant, const std::string& mode, const Tolerances& tol) {
  return analyze_detectability(deviation_system(plant, mode), tol, nullptr, mode);
}

Matrix stabilize_controllable_part(const Matrix& a, const Matrix& b, const Tolerances& tol) {
  const Eigen::Index r = a.rows();
  if (b.cols() == 0 || r == 0) return Matrix::Zero(b.cols(), r);
  const Subspace cs = controllable_subspace(a, b, tol.rank);
  if (cs.is_trivial()) return Matrix::Zero(b.cols(), r);
  const Matrix& t = cs.basis();
  const Matrix a11 = t.transpose() * a * t;
  const Matrix b1 = t.transpose() * b;
  const Eigen::Index c = a11.rows();
  const Eigen::Index m = b1.cols();
  Matrix p = Matrix::Identity(c, c);
  Matrix k1 = Matrix::Zero(m, c);
  for (int it = 0; it < 100000; ++it) {
    const Matrix s = Matrix::Identity(m, m) + b1.transpose() * p * b1;
    k1 = -s.ldlt().solve(b1.transpose() * p * a11);
    Matrix next = Matrix::Identity(c, c) + a11.transpose() * p * (a11 + b1 * k1);
    next = 0.5 * (next + next.transpose());
    const double delta = (next - p).norm() / std::max(1.0, next.norm());
    p = std::move(next);
    if (delta < 1e-13) break;
  }
  if (spectral_radius(a11 + b1 * k1) >= 1.0) {
    throw NumericalError("stabilizing gain: Riccati iteration did not stabilize the controllable part");
  }
  return k1 * t.transpose();
}

ImpulseSum impulse_norm_sum(const Matrix& a, const Matrix& c, const Matrix& b, const Matrix& d, int horizon,
                            double contraction) {
  ImpulseSum s;
  s.horizon = horizon;
  const double rho = spectral_radius(a);
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "thresholds undefined: spectral radius " << rho << " >= 1";
    throw ThresholdError(os.str());
  }
  if (b.cols() == 0 || c.rows() == 0) return s;
  const std::vector<double> norms = kernels::impulse_norms(a, c, b, d, horizon + 1);
  for (double v : norms) s.truncated += v;  // fixed order keeps the sum deterministic
  // Find L = 2^j with ||A^L|| <= contraction.
  Matrix al = a;
  int steps = 1;
  double q = spectral_norm(al);
  while (q > contraction) {
    al = al * al;
    steps *= 2;
    q = spectral_norm(al);
    if (steps > (1 << 28)) throw ThresholdError("tail bound: dynamics contract too slowly");
  }
  s.contraction = q;
  s.contraction_steps = steps;
  // sum_{k>H} ||C A^{k-1} B|| <= (sum_{i<L} ||C A^i||) ||A^H B|| / (1 - q).
  double head = 0.0;
  Matrix ca = c;
  for (int i = 0; i < steps; ++i) {
    head += spectral_norm(ca);
    ca = ca * a;
  }
  const Matrix ahb = matrix_power(a, horizon) * b;
  s.tail = head * spectral_norm(ahb) / (1.0 - q);
  return s;
}

SeverityBound severity_bound(const DeviationSystem& sys_in, const DetectabilityReport& rep, const Tolerances& tol) {
  if (rep.vulnerable()) throw ThresholdError("severity bound undefined: mode is vulnerable");
  const DeviationSystem sys = normalized(sys_in);
  SeverityBound sb;
  const Eigen::Index n = sys.state_dim();
  const Eigen::Index p = sys.output_dim();
  const Eigen::Index m = sys.attack_dim();
  const int h = static_cast<int>(n);

  // Friend with the controllable unstable part of the restricted map assigned away.
  Matrix m_used = rep.friend_used.m;
  RestrictedMap map = rep.map;
  bool needs_gain = false;
  for (const auto& e : rep.eigs) needs_gain = needs_gain || (e.unstable && e.controllable);
  if (needs_gain) {
    sb.stabilizing_gain = stabilize_controllable_part(rep.map.a_restricted, rep.map.b_n_restricted, tol);
    m_used = rep.friend_used.m + rep.friend_used.n * sb.stabilizing_gain * rep.map.v_star.transpose();
    map.a_restricted = rep.map.a_restricted + rep.map.b_n_restricted * sb.stabilizing_gain;
  }

  // eps1: from the n-frame window, ||P_perp_V x|| <= sqrt(n) eps / sigma_plus.
  const Eigen::Index codim = n - rep.v.dim();
  if (codim > 0 && p > 0) {
    Matrix o(h * p, n);
    Matrix g = Matrix::Zero(h * p, h * m);
    std::vector<Matrix> cab;  // C A^k B
    Matrix ak = Matrix::Identity(n, n);
    for (int i = 0; i < h; ++i) {
      o.middleRows(i * p, p) = sys.c * ak;
      cab.push_back(sys.c * ak * sys.b);
      ak = ak * sys.a;
    }
    for (int i = 0; i < h && m > 0; ++i) {
      g.block(i * p, i * m, p, m) = sys.d;
      for (int j = 0; j < i; ++j) g.block(i * p, j * m, p, m) = cab[static_cast<std::size_t>(i - j - 1)];
    }
    const Subspace rg = range_space(g, tol.rank);
    const Matrix po = o - rg.projector() * o;
    const Vector sv = singular_values(po);
    sb.sigma_plus = sv(codim - 1);
    if (sb.sigma_plus <= 0.0) throw NumericalError("severity bound: degenerate observability window");
    sb.eps1_gain = std::sqrt(static_cast<double>(h)) / sb.sigma_plus;
  }

  const Matrix pv_perp = rep.v.complement_projector();
  const Matrix pc_perp = rep.controllable.ambient_dim() == n ? rep.controllable.complement_projector()
                                                              : Matrix::Identity(n, n);
  sb.eps2_gain = spectral_norm(pinv(pv_perp + pc_perp, tol.rank)) * sb.eps1_gain;

  const Matrix am = sys.a + sys.b * m_used;
  const Matrix cm = sys.c + sys.d * m_used;
  const Matrix hm = sys.e + sys.f * m_used;
  sb.am_norm = spectral_norm(am);
  sb.hm_norm = spectral_norm(hm);
  const double b1 = sb.eps1_gain * (1.0 + spectral_norm(pv_perp * am));
  const double b2 = 1.0 + spectral_norm(cm) * sb.eps1_gain;
  sb.stack_gain = std::hypot(b1, b2);
  if (m > 0) {
    const Matrix bnm = sys.b * rep.friend_used.n;
    const Matrix pw = range_space(bnm, 1e-9).projector();
    const Matrix stack = vstack(vstack(pv_perp * sys.b, sys.d), pw * sys.b);
    const Matrix sp = pinv(stack, tol.rank);
    sb.kappa_b = spectral_norm(sys.b * sp);
    sb.kappa_f = spectral_norm(sys.f * sp);
  }

  // Severity transfer through the stable part of the restricted map.
  const Eigen::Index r = map.a_restricted.rows();
  if (r > 0 && sys.severity_dim() > 0) {
    const Matrix hv = hm * map.v_star;
    RestrictedMap probe = map;
    probe.b_n_restricted = Matrix::Zero(r, 0);
    const auto eigs = eig_structure(probe, tol);
    Matrix su(r, 0), ss(r, 0);
    for (const auto& e : eigs) {
      if (e.unstable) {
        su = hstack(su, e.generalized_eigenspace);
      } else {
        ss = hstack(ss, e.generalized_eigenspace);
      }
    }
    Matrix ps = Matrix::Identity(r, r);
    if (su.cols() > 0) {
      if ((hv * su).norm() > 1e-6 * std::max(1.0, hv.norm())) {
        sb.flags.push_back("unstable restricted mode not contained in the severity kernel");
      }
      if (ss.cols() + su.cols() != r) {
        sb.flags.push_back("eigenspace split incomplete; projector uses a least-squares completion");
      }
      const Matrix t = hstack(ss, su);
      Matrix sel = Matrix::Zero(t.cols(), t.cols());
      sel.topLeftCorner(ss.cols(), ss.cols()).setIdentity();
      ps = t * sel * pinv(t, tol.rank);
    }
    const Matrix as = map.a_restricted * ps;
    const ImpulseSum tail = impulse_norm_sum(as, hv, Matrix::Identity(r, r), Matrix::Zero(hv.rows(), r),
                                              4 * static_cast<int>(r) + 64);
    sb.stable_sum = tail.truncated + tail.tail;
  }

  const double beta = sb.kappa_b * sb.stack_gain;
  sb.gain = sb.stable_sum * (sb.am_norm * sb.eps2_gain + beta) + sb.hm_norm * sb.eps2_gain + sb.kappa_f * sb.stack_gain;
  return sb;
}

Thresholds compute_thresholds(const DeviationSystem& sys_in, const DetectabilityReport& rep,
                              const ThresholdOptions& opt, const Tolerances& tol) {
  const DeviationSystem sys = normalized(sys_in);
  Thresholds th;
  th.options = opt;
  th.truncation_horizon = opt.horizon;
  const ImpulseSum y = impulse_norm_sum(sys.a, sys.c, sys.b_w, sys.d_w, opt.horizon);
  const ImpulseSum z = impulse_norm_sum(sys.a, sys.e, sys.b_w, sys.f_w, opt.horizon);
  th.noise_gain_y = y.truncated;
  th.noise_gain_z = z.truncated;
  th.tail_bound = y.tail;
  th.tail_bound_z = z.tail;
  th.epsilon = opt.floor + (1.0 + opt.margin) * (y.truncated + y.tail) * opt.noise_bound;
  th.delta_noise = (1.0 + opt.margin) * (z.truncated + z.tail) * opt.noise_bound;
  th.severity = severity_bound(sys, rep, tol);
  th.delta_attack = th.severity(2.0 * th.epsilon);
  th.delta = th.delta_attack + th.delta_noise;
  return th;
}

Thresholds compute_thresholds(const LiftedPlant& plant, const std::string& mode, const ThresholdOptions& opt,
                              const Tolerances& tol) {
  const double rho = spectral_radius(plant.a);
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "thresholds undefined: lifted dynamics have spectral radius " << rho;
    throw ThresholdError(os.str());
  }
  const DeviationSystem sys = deviation_system(plant, mode);
  const DetectabilityReport rep = analyze_detectability(sys, tol, nullptr, mode);
  return compute_thresholds(sys, rep, opt, tol);
}

std::optional<int> alarm(const std::vector<double>& norms, double epsilon) {
  for (std::size_t k = 0; k < norms.size(); ++k) {
    if (norms[k] >= epsilon) return static_cast<int>(k);
  }
  return std::nullopt;
}

std::optional<int> alarm(const SimulationTrace& trace, double epsilon) { return alarm(trace.output_norms(), epsilon); }

}  // namespace liftguard
