/*
 Copyright 2026 The csc authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// End-to-end acceptance suite. Each numbered criterion runs with its
// tolerances pinned in code and prints one pass/fail line; the process exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "csc/linearize.hpp"
#include "csc/lqr.hpp"
#include "csc/rng.hpp"
#include "csc/rollout.hpp"
#include "csc/scenarios.hpp"
#include "csc/step.hpp"
#include "csc/trajopt.hpp"
#include "oracles.hpp"

using namespace csc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  vsnprintf(buf, sizeof(buf), f, args);
  va_end(args);
  return buf;
}

double pose_dist(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const auto [pos, ang] = terminal_error(a, b);
  return std::sqrt(pos * pos + ang * ang);
}

ShapeParam pinned_start(const Eigen::VectorXd& x0, double radius) {
  ShapeParam p;
  p.p = Eigen::VectorXd::Constant(1, radius);
  p.x_init = [x0](const Eigen::VectorXd&) { return x0; };
  return p;
}

Plan plan_push(const Scenario& s, const Eigen::VectorXd& goal, int T, int iters) {
  const Eigen::VectorXd start = Eigen::VectorXd::Zero(goal.size());
  const Eigen::VectorXd x0 = seated_state(s, start, goal, 0.045);
  const ReferencePlan ref = generate_reference(s, x0, goal, T);
  TrajoptOptions opts = default_trajopt_options(s);
  opts.max_iters = iters;
  opts.threads = 2;
  return sp_trajopt(s.scene, pinned_start(x0, s.spec.object_radius), ref,
                    default_cost_weights(s.n_u(), s.n_a()), opts);
}

// Shared planar fixture for the keypoint criteria.
struct KpFixture {
  Scenario scenario = build_planar_push('a');
  Plan plan;
  std::vector<Eigen::MatrixXd> A_seq, B_seq;
  KeypointSet kps;
};

KpFixture make_kp_fixture() {
  KpFixture f;
  Eigen::VectorXd goal(3);
  goal << 0.22, 0.06, 0.3;
  f.plan = plan_push(f.scenario, goal, 14, 300);
  for (int t = 0; t < f.plan.horizon(); ++t) {
    const Linearization lin = linearize(
        f.scenario.scene, f.scenario.scene.split(f.plan.x_opt.row(t)), f.plan.v_opt.row(t), 800.0);
    f.A_seq.push_back(lin.A);
    f.B_seq.push_back(lin.B);
  }
  f.kps = rim_keypoints(f.scenario.spec.object_radius);
  return f;
}

// ---------------------------------------------------------------------------

Outcome criterion1_derivatives() {
  double worst = 0.0;
  auto check = [&](const SceneModel& sc, const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                   double kappa) {
    const Linearization lin = linearize(sc, sc.split(x), u, kappa);
    const auto [A_fd, B_fd] = finite_diff_linearize(sc, sc.split(x), u, kappa, 1e-6);
    const double ea =
        (lin.A - A_fd).cwiseAbs().maxCoeff() / std::max(1.0, A_fd.cwiseAbs().maxCoeff());
    const double eb =
        (lin.B - B_fd).cwiseAbs().maxCoeff() / std::max(1.0, B_fd.cwiseAbs().maxCoeff());
    worst = std::max({worst, ea, eb});
  };

  const Scenario ball = build_ball1d();
  Eigen::VectorXd xb(2), ub(1);
  xb << 0.2, 0.05;
  ub << 0.13;  // engaged push
  const Scenario planar = build_planar_push('a');
  Eigen::VectorXd goal(3);
  goal << 0.25, 0.05, 0.2;
  const ReferencePlan ref = generate_reference(planar, planar.x_init, goal, 16);
  const Eigen::MatrixXd x_seq =
      rollout_open_loop(planar.scene, planar.x_init, ref.v_ref.topRows(4), 1e5);

  for (double kappa : {160.0, 800.0}) {
    check(ball.scene, ball.x_init, Eigen::VectorXd(ball.x_init.tail(1)), kappa);
    check(ball.scene, xb, ub, kappa);
    check(planar.scene, planar.x_init, Eigen::VectorXd(planar.x_init.tail(4)), kappa);
    check(planar.scene, x_seq.row(4), Eigen::VectorXd(ref.v_ref.row(4)), kappa);
  }
  return {worst <= 1e-4, fmt("max rel err %.2e (tol 1e-4)", worst)};
}

Outcome criterion2_smoothing() {
  const Scenario s = build_ball1d();
  Eigen::VectorXd x(2), u(1);
  x << 0.2, 0.0;
  u << 0.15;
  const Eigen::VectorXd exact = exact_step(s.scene, s.scene.split(x), u).x();
  double prev = std::numeric_limits<double>::infinity();
  double last = 0.0;
  bool monotone = true;
  for (double kappa : {100.0, 200.0, 400.0, 800.0, 1600.0, 1e5}) {
    const Eigen::VectorXd sm = smoothed_step(s.scene, s.scene.split(x), u, kappa).q_next.x();
    const double err = (sm - exact).cwiseAbs().maxCoeff();
    monotone = monotone && err < prev;
    prev = err;
    last = err;
  }
  return {monotone && last <= 1e-4,
          fmt("strictly decreasing=%d, e(1e5)=%.2e (tol 1e-4)", monotone, last)};
}

Outcome criterion3_lqr_oracle() {
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    SampleRng rng(31337, static_cast<uint64_t>(trial));
    const int n = 2 + static_cast<int>(rng.next() % 5);  // 2..6
    const int m = 1 + static_cast<int>(rng.next() % 3);  // 1..3
    const int T = 1 + static_cast<int>(rng.next() % 6);  // 1..6
    auto rnd = [&](int r, int c) {
      Eigen::MatrixXd M(r, c);
      for (int i = 0; i < r; ++i) {
        for (int j = 0; j < c; ++j) M(i, j) = rng.uniform(-1.0, 1.0);
      }
      return M;
    };
    std::vector<Eigen::MatrixXd> A_seq, B_seq, Q_seq, R_seq;
    for (int t = 0; t < T; ++t) {
      A_seq.push_back(rnd(n, n));
      B_seq.push_back(rnd(n, m));
      const Eigen::MatrixXd q = rnd(n, n);
      Q_seq.push_back(q.transpose() * q);
      const Eigen::MatrixXd r = rnd(m, m);
      R_seq.push_back(r.transpose() * r + 0.3 * Eigen::MatrixXd::Identity(m, m));
    }
    const Eigen::MatrixXd qT = rnd(n, n);
    const Eigen::MatrixXd Q_T = qT.transpose() * qT;
    const GainSchedule gs = tvlqr(A_seq, B_seq, Q_seq, R_seq, Q_T);
    const Eigen::MatrixXd K0 = oracles::dense_lqr_first_gain(A_seq, B_seq, Q_seq, R_seq, Q_T);
    worst = std::max(worst, (gs.K_seq[0] - K0).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, fmt("20 instances, max first-step gain err %.2e (tol 1e-8)", worst)};
}

Outcome criterion4_kp_structure(const KpFixture& f) {
  const int nx = 7;
  const int nz = f.kps.n_z();

  // (i) keypoint gain columns vanish.
  const GainSchedule kp_def =
      kp_lqr(f.A_seq, f.B_seq, f.plan.x_opt.leftCols(3), f.kps, kp_lqr_default_weights(3, 4, nz));
  double zmax = 0.0;
  for (const auto& K : kp_def.K_seq) zmax = std::max(zmax, K.rightCols(nz).cwiseAbs().maxCoeff());

  // (ii) zero keypoint weights reproduce vanilla gains.
  const LqrWeights vanilla = vanilla_lqr_weights(3, 4);
  LqrWeights expanded;
  expanded.Q = Eigen::MatrixXd::Zero(nx + nz, nx + nz);
  expanded.Q.topLeftCorner(nx, nx) = vanilla.Q;
  expanded.Q_T = Eigen::MatrixXd::Zero(nx + nz, nx + nz);
  expanded.Q_T.topLeftCorner(nx, nx) = vanilla.Q_T;
  expanded.R = vanilla.R;
  const GainSchedule plain = tvlqr(f.A_seq, f.B_seq, vanilla);
  const GainSchedule kp0 = kp_lqr(f.A_seq, f.B_seq, f.plan.x_opt.leftCols(3), f.kps, expanded);
  double dmax = 0.0;
  for (size_t t = 0; t < plain.K_seq.size(); ++t) {
    dmax = std::max(dmax, (kp0.K_seq[t].leftCols(nx) - plain.K_seq[t]).cwiseAbs().maxCoeff());
  }

  // (iii) relocating keypoints under zero weights changes nothing.
  KeypointSet moved;
  moved.offsets = {{0.02, 0.11}, {-0.07, 0.03}, {0.05, -0.09}, {0.0, 0.13}};
  const GainSchedule kp0m = kp_lqr(f.A_seq, f.B_seq, f.plan.x_opt.leftCols(3), moved, expanded);
  double mmax = 0.0;
  for (size_t t = 0; t < kp0.K_seq.size(); ++t) {
    mmax = std::max(mmax, (kp0m.K_seq[t] - kp0.K_seq[t]).cwiseAbs().maxCoeff());
  }

  const bool pass = zmax <= 1e-12 && dmax <= 1e-12 && mmax <= 1e-12;
  return {pass, fmt("z-columns %.1e, vanilla diff %.1e, relocation diff %.1e (tol 1e-12)",
                    zmax, dmax, mmax)};
}

Outcome criterion5_folded_weights(const KpFixture& f) {
  GainSchedule g_kp = kp_lqr(f.A_seq, f.B_seq, f.plan.x_opt.leftCols(3), f.kps,
                             kp_lqr_default_weights(3, 4, f.kps.n_z()));
  g_kp.kappa_gain = 800.0;

  const LqrWeights w_kp = kp_lqr_default_weights(3, 4, f.kps.n_z());
  LqrWeights w_fold;
  w_fold.Q = fold_keypoint_weights(w_kp.Q.topLeftCorner(7, 7),
                                   Eigen::Matrix2d::Identity() * 5.0, f.kps.n_p());
  w_fold.Q_T = fold_keypoint_weights(w_kp.Q_T.topLeftCorner(7, 7),
                                     Eigen::Matrix2d::Identity() * 20.0, f.kps.n_p());
  w_fold.R = w_kp.R;
  GainSchedule g_fold = tvlqr(f.A_seq, f.B_seq, w_fold);
  g_fold.kappa_gain = 800.0;

  PerturbationSpec spec;
  spec.samples = 10;
  spec.seed = 99;
  PlantOptions popts;
  popts.substeps = 4;
  const SweepReport r_kp = run_sweep(f.scenario, f.plan, &g_kp, spec, popts, 2);
  const SweepReport r_fold = run_sweep(f.scenario, f.plan, &g_fold, spec, popts, 2);
  if (!r_kp.delta_defined || !r_fold.delta_defined) return {false, "sweep produced no data"};
  const double rel = std::abs(r_fold.delta_pos - r_kp.delta_pos) / r_kp.delta_pos;
  return {rel <= 0.25, fmt("kp %.4f m vs folded %.4f m, rel diff %.3f (tol 0.25)",
                           r_kp.delta_pos, r_fold.delta_pos, rel)};
}

Outcome criterion6_kappa_direction() {
  const Scenario s = build_planar_push('a');
  Eigen::VectorXd goal(3);
  goal << 0.25, 0.0, 0.4;
  const Plan plan = plan_push(s, goal, 16, 300);
  PerturbationSpec spec;
  spec.samples = 24;  // paper bounds 0.025 m / 5 deg are the defaults
  spec.seed = 42;
  PlantOptions popts;
  popts.substeps = 4;
  const auto study =
      kappa_study(s, plan, vanilla_lqr_weights(3, 4), {160.0, 800.0}, spec, popts, 2);
  const SweepReport& r160 = study[0].second;
  const SweepReport& r800 = study[1].second;
  if (!r160.delta_defined || !r800.delta_defined) return {false, "sweep produced no data"};
  return {r160.delta_pos > r800.delta_pos,
          fmt("delta(160)=%.4f m > delta(800)=%.4f m [%d/%d ok]", r160.delta_pos, r800.delta_pos,
              r160.success_count() + r800.success_count(), 2 * spec.samples)};
}

Outcome criterion7_unilateral() {
  const UnilateralReport rep = unilateral_demo(160.0);
  const bool pull_exact_zero = rep.pull.exact_obj == 0.0;
  const bool pull_lin_nonzero = std::abs(rep.pull.lin_pred_obj) > 1e-6;
  const bool pull_retracts = rep.pull.dv0 < 0.0;
  const bool push_converges =
      rep.push.dv0 > 0.0 && rep.push.goal_dist_after < rep.push.goal_dist_before;
  const bool pass = pull_exact_zero && pull_lin_nonzero && pull_retracts && push_converges;
  return {pass, fmt("pull: exact=%g lin=%.3g dv=%.3g; push: %.3f->%.3f m", rep.pull.exact_obj,
                    rep.pull.lin_pred_obj, rep.pull.dv0, rep.push.goal_dist_before,
                    rep.push.goal_dist_after)};
}

Outcome criterion8_sp_improvement() {
  const Scenario s = build_planar_push('a');
  int improved = 0;
  const int n_cases = 20;
  for (int i = 0; i < n_cases; ++i) {
    SampleRng rng(1000, static_cast<uint64_t>(i));
    const double ang = rng.uniform(0, 2 * M_PI);
    const double dist = rng.uniform(0.15, 0.3);
    Eigen::VectorXd goal(3);
    goal << dist * std::cos(ang), dist * std::sin(ang), rng.uniform(-0.5, 0.5);
    const Eigen::VectorXd x0 = seated_state(s, Eigen::Vector3d(0, 0, 0), goal, 0.045);
    const ReferencePlan ref = generate_reference(s, x0, goal, 16);
    TrajoptOptions opts = default_trajopt_options(s);
    opts.threads = 2;
    const Eigen::MatrixXd warm = rollout_open_loop(s.scene, x0, ref.v_ref, opts.kappa);
    const double warm_err = pose_dist(warm.row(16).head(3), goal);
    const Plan plan = sp_trajopt(s.scene, pinned_start(x0, s.spec.object_radius), ref,
                                 default_cost_weights(3, 4), opts);
    const double opt_err = pose_dist(plan.x_opt.row(16).head(3), goal);
    if (opt_err <= 0.7 * warm_err) ++improved;
  }
  return {improved >= 16, fmt(">=30%% improvement on %d/%d scenarios (need 16)", improved,
                              n_cases)};
}

Outcome criterion9_mp_synergy() {
  const Scenario s = build_planar_push('a');
  int wins = 0, converged = 0;
  const int n_cases = 10;
  for (int i = 0; i < n_cases; ++i) {
    SampleRng rng(2000, static_cast<uint64_t>(i));
    const double ang = rng.uniform(0, 2 * M_PI);
    const double dist = rng.uniform(0.18, 0.3);
    Eigen::VectorXd goal(3);
    goal << dist * std::cos(ang), dist * std::sin(ang), rng.uniform(-0.4, 0.4);
    const Eigen::Vector3d start(0, 0, 0);
    const Eigen::VectorXd x0 = seated_state(s, start, goal, 0.045);
    const ReferencePlan ref = generate_reference(s, x0, goal, 14);
    TrajoptOptions opts = default_trajopt_options(s);
    opts.max_iters = 300;
    opts.threads = 2;

    const Plan sp = sp_trajopt(s.scene, pinned_start(x0, s.spec.object_radius), ref,
                               default_cost_weights(3, 4), opts);
    const Plan mp = mp_trajopt(scene_family(s), shape_particles(s, "abc", start, goal, 0.045),
                               ref, default_cost_weights(3, 4), opts);

    // Both planners execute open loop under the radius sweep (same controller).
    PerturbationSpec spec;
    spec.kind = PerturbationSpec::Kind::kShapeRadius;
    spec.dr0 = 0.01;
    spec.samples = 20;
    spec.seed = 500 + static_cast<uint64_t>(i);
    PlantOptions popts;
    popts.substeps = 4;
    const SweepReport r_sp = run_sweep(s, sp, nullptr, spec, popts, 2);
    const SweepReport r_mp = run_sweep(s, mp, nullptr, spec, popts, 2);
    if (!r_sp.delta_defined || !r_mp.delta_defined) continue;
    ++converged;
    if (r_mp.delta_pos < r_sp.delta_pos) ++wins;
  }
  const bool pass = converged > 0 && wins * 10 >= converged * 6;
  return {pass, fmt("MP beats SP on %d/%d converged scenarios (need 60%%)", wins, converged)};
}

Outcome criterion10_metrics() {
  // Relative-cost arithmetic on the published pair.
  const double e = eta(0.30, 0.046);
  const bool eta_ok = std::abs(e - 6.5) <= 0.05;

  // Zero-perturbation closed loop reproduces the plan.
  const Scenario s = build_ball1d();
  Eigen::VectorXd goal(1);
  goal << 0.45;
  const Eigen::VectorXd x0 = s.x_init;
  const ReferencePlan ref = generate_reference(s, x0, goal, 8);
  Plan plan;
  plan.v_opt = ref.v_ref;
  plan.x_opt = rollout_open_loop(s.scene, x0, ref.v_ref, 1e5);
  plan.goal = ref.goal();
  plan.kappa = 1e5;
  const GainSchedule gains = gains_along_plan(s.scene, plan, vanilla_lqr_weights(1, 1), 800.0);
  const FohController c = build_foh(plan, gains, s.scene.h);
  PlantOptions popts;
  popts.kind = PlantOptions::Kind::kSmoothed;
  popts.kappa = 1e5;
  popts.substeps = 1;
  const RolloutResult rr = closed_loop_rollout(s.scene, c, plan.x_opt.row(0), popts);
  const double dev =
      rr.success ? (rr.terminal() - plan.x_opt.row(8).transpose()).cwiseAbs().maxCoeff() : 1.0;

  // Angle wrap range.
  bool wrap_ok = true;
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd a(3), b(3);
    a << 0, 0, 23.0 * std::sin(i * 0.77);
    b << 0, 0, -17.0 * std::cos(i * 1.3);
    const double w = terminal_error(a, b).second;
    wrap_ok = wrap_ok && w >= 0.0 && w <= M_PI + 1e-15;
  }

  // Determinism across thread counts.
  const Scenario sp = build_planar_push('a');
  Eigen::VectorXd pgoal(3);
  pgoal << 0.2, 0.05, 0.1;
  const Eigen::VectorXd px0 = seated_state(sp, Eigen::Vector3d(0, 0, 0), pgoal, 0.045);
  const ReferencePlan pref = generate_reference(sp, px0, pgoal, 6);
  Plan pplan;
  pplan.v_opt = pref.v_ref;
  pplan.x_opt = rollout_open_loop(sp.scene, px0, pref.v_ref, 1e5);
  pplan.goal = pref.goal();
  pplan.kappa = 1e5;
  PerturbationSpec spec;
  spec.samples = 8;
  spec.seed = 7;
  PlantOptions ex;
  ex.substeps = 2;
  const SweepReport r1 = run_sweep(sp, pplan, nullptr, spec, ex, 1);
  const SweepReport r4 = run_sweep(sp, pplan, nullptr, spec, ex, 4);
  bool det_ok = r1.delta_pos == r4.delta_pos && r1.delta_ang == r4.delta_ang;
  for (size_t i = 0; det_ok && i < r1.records.size(); ++i) {
    det_ok = r1.records[i].pos_err == r4.records[i].pos_err &&
             r1.records[i].ang_err == r4.records[i].ang_err;
  }

  const bool pass = eta_ok && dev <= 1e-8 && wrap_ok && det_ok;
  return {pass, fmt("eta=%.4f (6.5±0.05), replay dev %.1e (tol 1e-8), wrap=%d, deterministic=%d",
                    e, dev, wrap_ok, det_ok)};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_s;  // 0 = unbudgeted
  };

  KpFixture kp_fixture;  // shared by criteria 4 and 5 (built lazily below)
  bool kp_ready = false;
  auto ensure_kp = [&]() {
    if (!kp_ready) {
      kp_fixture = make_kp_fixture();
      kp_ready = true;
    }
  };

  const std::vector<Entry> entries = {
      {1, "derivative correctness", criterion1_derivatives, 10.0},
      {2, "smoothing consistency", criterion2_smoothing, 5.0},
      {3, "LQR oracle equivalence", criterion3_lqr_oracle, 5.0},
      {4, "KP-LQR structural claims",
       [&] {
         ensure_kp();
         return criterion4_kp_structure(kp_fixture);
       },
       0.0},
      {5, "folded-weight similarity",
       [&] {
         ensure_kp();
         return criterion5_folded_weights(kp_fixture);
       },
       0.0},
      {6, "kappa-study direction", criterion6_kappa_direction, 300.0},
      {7, "unilaterality demo", criterion7_unilateral, 10.0},
      {8, "SP-TrajOPT improvement", criterion8_sp_improvement, 600.0},
      {9, "MP synergy direction", criterion9_mp_synergy, 900.0},
      {10, "metric arithmetic and determinism", criterion10_metrics, 0.0},
  };

  int failures = 0;
  for (const auto& e : entries) {
    const double t0 = now_s();
    Outcome out;
    try {
      out = e.run();
    } catch (const std::exception& ex) {
      out = {false, std::string("exception: ") + ex.what()};
    }
    const double elapsed = now_s() - t0;
    bool pass = out.pass;
    std::string budget;
    if (e.budget_s > 0.0) {
      budget = fmt(" [%.1f s / %.0f s]", elapsed, e.budget_s);
      if (elapsed > e.budget_s) pass = false;
    } else {
      budget = fmt(" [%.1f s]", elapsed);
    }
    std::printf("[%s] %2d. %s: %s%s\n", pass ? "PASS" : "FAIL", e.id, e.name,
                out.detail.c_str(), budget.c_str());
    failures += pass ? 0 : 1;
  }
  if (failures > 0) std::printf("%d criterion(s) FAILED\n", failures);
  else std::printf("all %zu criteria passed\n", entries.size());
  return failures;
}
