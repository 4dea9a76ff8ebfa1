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

#include "liftguard/identify.hpp"

#include "liftguard/errors.hpp"
#include "liftguard/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace liftguard {

namespace {

Matrix block_diag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

// Top right singular vector of `m` restricted to `basis` when its gain
// exceeds `thr`.
std::optional<Vector> escaping_direction(const Matrix& m, const Matrix& basis, double thr) {
  if (basis.cols() == 0 || m.rows() == 0) return std::nullopt;
  const Matrix mb = m * basis;
  Eigen::JacobiSVD<Matrix> svd(mb, Eigen::ComputeFullV);
  if (svd.singularValues().size() == 0 || svd.singularValues()(0) <= thr) return std::nullopt;
  return Vector((basis * svd.matrixV().col(0)).normalized());
}

}  // namespace

const char* to_string(InitialState s) { return s == InitialState::zero ? "zero" : "free"; }

InitialState initial_state_from_string(const std::string& s) {
  if (s == "zero") return InitialState::zero;
  if (s == "free") return InitialState::free;
  throw FormatError("unknown initial-state convention '" + s + "'");
}

AugmentedPair build_augmented(const DeviationSystem& sp_in, const DeviationSystem& sq_in, const std::string& p,
                              const std::string& q, const Tolerances& tol) {
  DeviationSystem sp = sp_in, sq = sq_in;
  sp.normalize();
  sq.normalize();
  if (sp.state_dim() != sq.state_dim() || sp.output_dim() != sq.output_dim() ||
      sp.severity_dim() != sq.severity_dim() || (sp.a - sq.a).norm() > 0.0 || (sp.c - sq.c).norm() > 0.0) {
    throw DimensionError("augmented pair: modes " + p + " and " + q + " do not share the nominal plant");
  }
  AugmentedPair pair;
  pair.p = p;
  pair.q = q;
  pair.single_dim = sp.state_dim();
  pair.attack_dim_p = sp.attack_dim();
  DeviationSystem& s = pair.sys;
  s.a = block_diag(sp.a, sq.a);
  s.b = block_diag(sp.b, sq.b);
  s.c = hstack(sp.c, -sq.c);
  s.d = hstack(sp.d, -sq.d);
  s.e = block_diag(sp.e, sq.e);
  s.f = block_diag(sp.f, sq.f);
  // One physical noise drives both copies, so it cancels in the residual output.
  s.b_w = vstack(sp.b_w, sq.b_w);
  s.d_w = sp.d_w - sq.d_w;
  s.f_w = vstack(sp.f_w, sq.f_w);
  s.normalize();
  pair.v_pq = max_output_nulling(s.a, s.b, s.c, s.d, tol.rank);
  return pair;
}

AugmentedPair build_augmented(const LiftedPlant& plant, const std::string& p, const std::string& q,
                              const Tolerances& tol) {
  return build_augmented(deviation_system(plant, p), deviation_system(plant, q), p, q, tol);
}

DiscernibilityVerdict check_discernibility(const AugmentedPair& pair, InitialState convention,
                                           const Tolerances& tol) {
  const DeviationSystem& s = pair.sys;
  DiscernibilityVerdict v;
  v.p = pair.p;
  v.q = pair.q;
  v.convention = convention;

  v.zero_state_report = analyze_detectability(s, tol, nullptr, pair.p + "|" + pair.q);
  v.pair_friend = v.zero_state_report.friend_used;
  v.zero_state_discernible = !v.zero_state_report.vulnerable();
  if (!v.zero_state_discernible) v.zero_state_failed = to_string(v.zero_state_report.condition);

  // Free initial pair state: kernel condition, then the friend on V_pq.
  const Friend& fr = v.pair_friend;
  if (auto w = check_condition_i(s, tol)) {
    v.free_state_discernible = false;
    v.free_state_failed = "i";
    v.free_state_witness = *w;
  } else {
    const double fthr = tol.residual * std::max(1.0, spectral_norm(s.f));
    if (fr.n.cols() > 0) {
      const Matrix fn = s.f * fr.n;
      for (Eigen::Index c = 0; c < fn.cols(); ++c) {
        if (fn.col(c).norm() > fthr * std::max(1.0, fr.n.col(c).norm())) {
          v.free_state_discernible = false;
          v.free_state_failed = "ii-FN";
          v.free_state_witness = Vector::Unit(fr.n.cols(), c);
          break;
        }
      }
    }
    if (v.free_state_discernible) {
      const Matrix h = s.e + s.f * fr.m;
      const double hthr = tol.residual * std::max(1.0, spectral_norm(h));
      if (auto d = escaping_direction(h, pair.v_pq.basis(), hthr)) {
        v.free_state_discernible = false;
        v.free_state_failed = "ii-EV";
        v.free_state_witness = *d;
      }
    }
  }

  if (convention == InitialState::zero) {
    v.discernible = v.zero_state_discernible;
    v.failed = v.zero_state_failed;
    const auto& rep = v.zero_state_report;
    if (rep.witness_i) v.witness = *rep.witness_i;
    else if (rep.witness_ii) v.witness = rep.witness_ii->value;
    else if (rep.witness_iii) v.witness = rep.witness_iii->eta.col(0);
  } else {
    v.discernible = v.free_state_discernible;
    v.failed = v.free_state_failed;
    v.witness = v.free_state_witness;
  }
  return v;
}

IdentifiabilityResult check_identifiable(const LiftedPlant& plant, const std::vector<std::string>& modes,
                                         InitialState convention, const Tolerances& tol) {
  IdentifiabilityResult res;
  res.modes = modes;
  res.convention = convention;
  for (const auto& m : modes) (void)plant.channels(m);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (std::size_t j = i + 1; j < modes.size(); ++j) {
      const AugmentedPair pair = build_augmented(plant, modes[i], modes[j], tol);
      res.pairs.push_back(check_discernibility(pair, convention, tol));
      if (!res.pairs.back().discernible) res.identifiable = false;
    }
  }
  return res;
}

IndiscernibleRun free_state_witness_run(const AugmentedPair& pair, const DiscernibilityVerdict& verdict,
                                        double target, int frames) {
  const DeviationSystem& s = pair.sys;
  const Friend& fr = verdict.pair_friend;
  IndiscernibleRun run;
  run.x0 = Vector::Zero(s.state_dim());
  Vector a0 = Vector::Zero(s.attack_dim());
  if (verdict.free_state_failed == "i") {
    a0 = verdict.free_state_witness * (target / (s.f * verdict.free_state_witness).norm());
  } else if (verdict.free_state_failed == "ii-FN") {
    const Vector nt = fr.n * verdict.free_state_witness;
    a0 = nt * (target / (s.f * nt).norm());
  } else if (verdict.free_state_failed == "ii-EV") {
    const Vector& d = verdict.free_state_witness;
    run.x0 = d * (target / ((s.e + s.f * fr.m) * d).norm());
  } else {
    throw Error("pair " + pair.p + "/" + pair.q + " has no free-state indiscernibility witness");
  }
  const bool closed_loop = verdict.free_state_failed != "i";
  const Matrix& vb = fr.v.basis();
  Vector x = run.x0;
  for (int k = 0; k < frames; ++k) {
    Vector a = closed_loop ? Vector(fr.m * x) : Vector::Zero(s.attack_dim());
    if (k == 0) a += a0;
    run.inputs.push_back(a);
    x = s.a * x + s.b * a;
    // A + B M can be violently unstable off V; keep the reference on V.
    if (closed_loop) x = vb * (vb.transpose() * x);
  }
  return run;
}

int ResidualBank::index(const std::string& mode) const {
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].mode == mode) return static_cast<int>(i);
  }
  throw Error("residual bank has no mode '" + mode + "'");
}

double ResidualBank::residual(std::size_t mode, const Vector& y) const {
  const Matrix& q = modes.at(mode).range_basis;
  if (y.size() != q.rows()) throw DimensionError("residual: stacked window has the wrong length");
  if (q.cols() == 0) return y.norm();
  return (y - q * (q.transpose() * y)).norm();
}

namespace {

// Stacked window blocks: O = [C; CA; ...], G lower block Toeplitz with
// `feed` on the diagonal and C A^{i-j-1} `in` below it.
Matrix window_observability(const Matrix& a, const Matrix& c, int window) {
  Matrix o(c.rows() * window, a.cols());
  Matrix ca = c;
  for (int j = 0; j < window; ++j) {
    o.middleRows(j * c.rows(), c.rows()) = ca;
    ca = ca * a;
  }
  return o;
}

Matrix window_toeplitz(const Matrix& a, const Matrix& c, const Matrix& in, const Matrix& feed, int window) {
  const Eigen::Index p = c.rows(), m = in.cols();
  Matrix g = Matrix::Zero(p * window, m * window);
  std::vector<Matrix> markov(static_cast<std::size_t>(window));
  markov[0] = feed;
  Matrix ak_b = in;
  for (int k = 1; k < window; ++k) {
    markov[static_cast<std::size_t>(k)] = c * ak_b;
    ak_b = a * ak_b;
  }
  for (int i = 0; i < window; ++i) {
    for (int j = 0; j <= i; ++j) g.block(i * p, j * m, p, m) = markov[static_cast<std::size_t>(i - j)];
  }
  return g;
}

int resolve_window(const LiftedPlant& plant, int window) {
  return window > 0 ? window : static_cast<int>(plant.state_dim()) + 2;
}

}  // namespace

ResidualBank build_residual_bank(const LiftedPlant& plant, const std::vector<std::string>& modes,
                                 const std::map<std::string, double>& thresholds, int window,
                                 const Tolerances& tol) {
  ResidualBank bank;
  bank.window = resolve_window(plant, window);
  bank.output_dim = plant.output_dim();
  for (const auto& id : modes) {
    const ModeChannels& ch = plant.channels(id);
    ModeResidual mr;
    mr.mode = id;
    mr.o = window_observability(plant.a, plant.c, bank.window);
    mr.g = window_toeplitz(plant.a, plant.c, ch.b_a, ch.d_a, bank.window);
    mr.range_basis = range_space(hstack(mr.o, mr.g), tol.rank).basis();
    auto it = thresholds.find(id);
    if (it == thresholds.end()) throw ThresholdError("no identification threshold for mode '" + id + "'");
    mr.epsilon = it->second;
    bank.modes.push_back(std::move(mr));
  }
  return bank;
}

std::vector<std::string> IdentificationHistory::final_modes() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (final_set[i]) out.push_back(modes[i]);
  }
  return out;
}

IdentificationHistory run_identification(const ResidualBank& bank, const SimulationTrace& trace, int alarm_frame) {
  IdentificationHistory h;
  for (const auto& m : bank.modes) h.modes.push_back(m.mode);
  h.final_set.assign(bank.modes.size(), true);
  if (alarm_frame < 0) throw DimensionError("identification: negative alarm frame");
  const int count = trace.frames() - bank.window - alarm_frame + 1;
  if (count <= 0) {
    throw DimensionError("identification window underflow: need " + std::to_string(bank.window) +
                         " frames after the alarm, trace has " + std::to_string(trace.frames() - alarm_frame));
  }
  std::vector<std::vector<double>> r(bank.modes.size());
  for (std::size_t i = 0; i < bank.modes.size(); ++i) {
    r[i] = kernels::window_residuals(bank.modes[i].range_basis, trace.y, bank.window, alarm_frame, count);
  }
  for (int k = 0; k < count; ++k) {
    IdentificationStep st;
    st.frame = alarm_frame + k;
    std::size_t left = 0;
    for (std::size_t i = 0; i < bank.modes.size(); ++i) {
      const double ri = r[i][static_cast<std::size_t>(k)];
      st.residuals.push_back(ri);
      if (ri > bank.modes[i].epsilon) h.final_set[i] = false;
      if (h.final_set[i]) ++left;
    }
    st.membership = h.final_set;
    if (left == 0 && !h.unmodeled_attack_frame) h.unmodeled_attack_frame = st.frame;
    if (left == 1 && !h.collapse_frame) h.collapse_frame = st.frame;
    h.steps.push_back(std::move(st));
  }
  return h;
}

std::map<std::string, double> calibrate_identification_thresholds(const LiftedPlant& plant,
                                                                  const std::vector<std::string>& modes,
                                                                  double noise_bound, int window, double margin,
                                                                  double floor, const Tolerances& tol) {
  const int l = resolve_window(plant, window);
  std::map<std::string, double> out;
  const Matrix o = window_observability(plant.a, plant.c, l);
  const Matrix gw = window_toeplitz(plant.a, plant.c, plant.b_w, plant.d_w, l);
  for (const auto& id : modes) {
    const ModeChannels& ch = plant.channels(id);
    const Matrix g = window_toeplitz(plant.a, plant.c, ch.b_a, ch.d_a, l);
    const Subspace range = range_space(hstack(o, g), tol.rank);
    Matrix pg = gw;
    if (range.dim() > 0) pg -= range.basis() * (range.basis().transpose() * gw);
    double bound = 0.0;
    if (pg.cols() > 0) {
      const double whole = spectral_norm(pg) * std::sqrt(static_cast<double>(l));
      double blocks = 0.0;
      const Eigen::Index mw = plant.noise_dim();
      for (int j = 0; j < l; ++j) blocks += spectral_norm(pg.middleCols(j * mw, mw));
      bound = std::min(whole, blocks);
    }
    out[id] = floor + (1.0 + margin) * noise_bound * bound;
  }
  return out;
}

void write_identification_csv(std::ostream& os, const IdentificationHistory& h) {
  os << "frame";
  for (const auto& m : h.modes) os << ",r_" << m;
  os << ",membership\n";
  for (const auto& st : h.steps) {
    os << st.frame;
    for (double r : st.residuals) os << ',' << r;
    unsigned long long mask = 0;
    for (std::size_t i = 0; i < st.membership.size() && i < 64; ++i) {
      if (st.membership[i]) mask |= 1ULL << i;
    }
    os << ',' << mask << '\n';
  }
}

}  // namespace liftguard
