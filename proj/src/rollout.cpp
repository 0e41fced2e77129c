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

#include "csc/rollout.hpp"

#include <algorithm>
#include <cmath>

#include "csc/linearize.hpp"
#include "csc/parallel.hpp"
#include "csc/rng.hpp"
#include "csc/step.hpp"

namespace csc {

namespace {

// Interpolation index and fraction for knots at k*h, clamped to [0, last].
// Snaps to the nearest knot so knot-time evaluation reproduces knots exactly.
std::pair<int, double> locate(double t, double h, int last_knot) {
  double s = t / h;
  const double snapped = std::round(s);
  if (std::abs(s - snapped) < 1e-9 * std::max(1.0, std::abs(s))) s = snapped;
  if (s <= 0.0) return {0, 0.0};
  if (s >= last_knot) return {last_knot, 0.0};
  const int k = static_cast<int>(std::floor(s));
  const double f = s - k;
  return f == 0.0 ? std::pair<int, double>{k, 0.0} : std::pair<int, double>{k, f};
}

}  // namespace

Eigen::VectorXd FohController::x_nominal(double t) const {
  const auto [k, f] = locate(t, h, static_cast<int>(x_knots.rows()) - 1);
  if (f == 0.0) return x_knots.row(k);
  return (1.0 - f) * x_knots.row(k) + f * x_knots.row(k + 1);
}

Eigen::VectorXd FohController::v_nominal(double t) const {
  const auto [k, f] = locate(t, h, static_cast<int>(v_knots.rows()) - 1);
  if (f == 0.0) return v_knots.row(k);
  return (1.0 - f) * v_knots.row(k) + f * v_knots.row(k + 1);
}

Eigen::MatrixXd FohController::gain(double t) const {
  const auto [k, f] = locate(t, h, static_cast<int>(k_knots.size()) - 1);
  if (f == 0.0) return k_knots[static_cast<size_t>(k)];
  return (1.0 - f) * k_knots[static_cast<size_t>(k)] + f * k_knots[static_cast<size_t>(k) + 1];
}

Eigen::VectorXd FohController::command(double t, const Eigen::VectorXd& x_mea) const {
  const Eigen::VectorXd x_nom = x_nominal(t);
  const Eigen::MatrixXd K = gain(t);
  Eigen::VectorXd err;
  if (layout == GainSchedule::Layout::kExpanded) {
    err.resize(x_mea.size() + keypoints.n_z());
    err.head(x_mea.size()) = x_mea - x_nom;
    err.tail(keypoints.n_z()) =
        keypoint_observe(x_mea.head<3>(), keypoints) - keypoint_observe(x_nom.head<3>(), keypoints);
  } else {
    err = x_mea - x_nom;
  }
  return v_nominal(t) - K * err;
}

FohController build_foh(const Plan& plan, const GainSchedule& gains, double h,
                        const KeypointSet* kps) {
  if (gains.horizon() != plan.horizon()) {
    throw ConfigError("plan and gain schedule horizons differ");
  }
  FohController c;
  c.x_knots = plan.x_opt;
  c.v_knots = plan.v_opt;
  c.k_knots = gains.K_seq;
  c.h = h;
  c.layout = gains.layout;
  if (gains.layout == GainSchedule::Layout::kExpanded) {
    if (!kps) throw ConfigError("expanded gains need the keypoint set");
    c.keypoints = *kps;
  }
  return c;
}

GainSchedule zero_gains(int T, int n_a, int n_x) {
  GainSchedule gs;
  gs.n_x = n_x;
  gs.K_seq.assign(static_cast<size_t>(T), Eigen::MatrixXd::Zero(n_a, n_x));
  gs.P_seq.assign(static_cast<size_t>(T) + 1, Eigen::MatrixXd::Zero(n_x, n_x));
  return gs;
}

RolloutResult closed_loop_rollout(const SceneModel& scene, const FohController& controller,
                                  const Eigen::VectorXd& x_start, const PlantOptions& opts) {
  if (opts.substeps < 1) throw ConfigError("substeps must be >= 1");
  const int T = controller.horizon();
  const int s = opts.substeps;
  const int n_steps = T * s;

  // Substepped plant: (h, epsilon) -> (h/s, epsilon/s) keeps the knot-rate
  // object mobility for sustained forces.
  SceneModel plant = scene;
  plant.h = scene.h / s;
  plant.epsilon = scene.epsilon / s;

  RolloutResult out;
  out.x_traj.resize(n_steps + 1, scene.n_x());
  out.u_traj.resize(n_steps, scene.n_a());
  out.x_traj.row(0) = x_start;

  Eigen::VectorXd x = x_start;
  for (int i = 0; i < n_steps; ++i) {
    const double t = i * plant.h;
    Eigen::VectorXd u = controller.command(t, x);
    if (opts.v_lo.size() > 0) u = u.cwiseMax(opts.v_lo);
    if (opts.v_hi.size() > 0) u = u.cwiseMin(opts.v_hi);
    out.u_traj.row(i) = u;
    try {
      if (opts.kind == PlantOptions::Kind::kExact) {
        x = exact_step(plant, plant.split(x), u).x();
      } else {
        x = smoothed_step(plant, plant.split(x), u, opts.kappa).q_next.x();
      }
    } catch (const NumericError& e) {
      out.success = false;
      out.fail_substep = i;
      out.fail_reason = e.what();
      out.x_traj.conservativeResize(i + 1, Eigen::NoChange);
      out.u_traj.conservativeResize(i + 1, Eigen::NoChange);
      return out;
    }
    out.x_traj.row(i + 1) = x;
    if (opts.escape_lo.size() > 0 &&
        (((x - opts.escape_lo).array() < 0.0).any() ||
         ((opts.escape_hi - x).array() < 0.0).any())) {
      out.success = false;
      out.fail_substep = i;
      out.fail_reason = "state left the safety box";
      out.x_traj.conservativeResize(i + 2, Eigen::NoChange);
      out.u_traj.conservativeResize(i + 1, Eigen::NoChange);
      return out;
    }
  }
  return out;
}

std::pair<double, double> terminal_error(const Eigen::VectorXd& obj_mea,
                                         const Eigen::VectorXd& obj_ref) {
  if (obj_mea.size() != obj_ref.size()) throw ConfigError("object pose sizes differ");
  if (obj_mea.size() == 1) return {std::abs(obj_mea[0] - obj_ref[0]), 0.0};
  if (obj_mea.size() == 3) {
    const double pos = (obj_mea.head<2>() - obj_ref.head<2>()).norm();
    const double ang = std::abs(wrap_angle(obj_mea[2] - obj_ref[2]));
    return {pos, ang};
  }
  throw ConfigError("object pose must have 1 or 3 coordinates");
}

int SweepReport::success_count() const {
  int n = 0;
  for (const auto& r : records) n += r.success ? 1 : 0;
  return n;
}

namespace {

void aggregate(SweepReport& rep) {
  const int n = rep.success_count();
  rep.delta_defined = n > 0;
  if (!rep.delta_defined) return;
  double sp = 0.0, sa = 0.0;
  for (const auto& r : rep.records) {
    if (!r.success) continue;
    sp += r.pos_err;
    sa += r.ang_err;
  }
  rep.delta_pos = sp / n;
  rep.delta_ang = sa / n;
  if (n >= 2) {
    double vp = 0.0, va = 0.0;
    for (const auto& r : rep.records) {
      if (!r.success) continue;
      vp += (r.pos_err - rep.delta_pos) * (r.pos_err - rep.delta_pos);
      va += (r.ang_err - rep.delta_ang) * (r.ang_err - rep.delta_ang);
    }
    vp /= n - 1;
    va /= n - 1;
    rep.ci95_pos = 1.96 * std::sqrt(vp / n);
    rep.ci95_ang = 1.96 * std::sqrt(va / n);
  }
}

}  // namespace

SweepReport run_sweep(const Scenario& scenario, const Plan& plan, const GainSchedule* gains,
                      const PerturbationSpec& spec, const PlantOptions& plant_opts, int threads) {
  const int n_u = scenario.n_u();
  const bool planar = scenario.spec.kind == ScenarioSpec::Kind::kPlanar;

  GainSchedule zeros;
  if (!gains) {
    zeros = zero_gains(plan.horizon(), scenario.n_a(), scenario.scene.n_x());
    gains = &zeros;
  }
  KeypointSet kps = rim_keypoints(scenario.spec.object_radius);
  const FohController controller = build_foh(plan, *gains, scenario.scene.h, &kps);

  PlantOptions opts = plant_opts;
  if (opts.v_lo.size() == 0) opts.v_lo = scenario.v_lo;
  if (opts.v_hi.size() == 0) opts.v_hi = scenario.v_hi;
  if (opts.escape_lo.size() == 0) {
    const Eigen::VectorXd mid = 0.5 * (scenario.x_lo + scenario.x_hi);
    opts.escape_lo = mid + 10.0 * (scenario.x_lo - mid);
    opts.escape_hi = mid + 10.0 * (scenario.x_hi - mid);
  }

  SweepReport rep;
  rep.spec = spec;
  rep.seed = spec.seed;
  rep.kappa_plan = plan.kappa;
  rep.kappa_gain = gains->kappa_gain;
  rep.controller = gains == &zeros ? "open_loop"
                   : gains->layout == GainSchedule::Layout::kExpanded ? "kp_lqr"
                                                                      : "lqr";
  rep.records.resize(static_cast<size_t>(spec.samples));

  parallel_for(spec.samples, threads, [&](int i) {
    SampleRng rng(spec.seed, static_cast<uint64_t>(i));
    SweepRecord rec;
    rec.sample_id = i;

    Eigen::VectorXd x_start = plan.x_opt.row(0);
    SceneModel scene = scenario.scene;
    if (spec.kind == PerturbationSpec::Kind::kInitialPose) {
      if (planar) {
        rec.perturbation.resize(3);
        rec.perturbation << rng.uniform(-spec.dx0, spec.dx0), rng.uniform(-spec.dy0, spec.dy0),
            rng.uniform(-spec.dtheta0, spec.dtheta0);
        x_start.head<3>() += rec.perturbation;
      } else {
        rec.perturbation.resize(1);
        rec.perturbation << rng.uniform(-spec.dx0, spec.dx0);
        x_start[0] += rec.perturbation[0];
      }
    } else {
      rec.perturbation.resize(1);
      rec.perturbation << rng.uniform(-spec.dr0, spec.dr0);
      scene = scenario.scene_with_radius_delta(rec.perturbation[0]);
    }

    RolloutResult rr;
    try {
      rr = closed_loop_rollout(scene, controller, x_start, opts);
    } catch (const NumericError&) {
      rr.success = false;
    }
    rec.success = rr.success;
    if (rr.success) {
      const Eigen::VectorXd term = rr.terminal();
      const auto [pos, ang] = terminal_error(term.head(n_u), plan.goal.head(n_u));
      rec.pos_err = pos;
      rec.ang_err = ang;
    }
    rep.records[static_cast<size_t>(i)] = std::move(rec);
  });

  aggregate(rep);
  return rep;
}

double eta(double delta_b, double delta_a) {
  if (delta_a == 0.0) throw NumericError("eta undefined for a zero baseline");
  return delta_b / delta_a;
}

std::vector<std::pair<double, SweepReport>> kappa_study(const Scenario& scenario, const Plan& plan,
                                                        const LqrWeights& weights,
                                                        const std::vector<double>& kappa_list,
                                                        const PerturbationSpec& spec,
                                                        const PlantOptions& plant_opts,
                                                        int threads) {
  if (kappa_list.empty()) throw ConfigError("kappa_study needs at least one kappa");
  std::vector<std::pair<double, SweepReport>> out;
  for (double kappa : kappa_list) {
    GainSchedule gains = gains_along_plan(scenario.scene, plan, weights, kappa);
    gains.kappa_gain = kappa;
    out.emplace_back(kappa, run_sweep(scenario, plan, &gains, spec, plant_opts, threads));
  }
  return out;
}

UnilateralReport unilateral_demo(double kappa) {
  const Scenario s = build_ball1d();
  const SceneModel& sc = s.scene;

  // Engaged push: finger 0.03 behind the ball surface, commanded 0.02 past it.
  Eigen::VectorXd x_nom(2);
  x_nom << 0.2, 0.07;
  Eigen::VectorXd u_nom(1);
  u_nom << 0.12;

  const Linearization lin = linearize(sc, sc.split(x_nom), u_nom, kappa);
  Eigen::MatrixXd P1 = Eigen::MatrixXd::Zero(2, 2);
  P1(0, 0) = 1.0;  // penalize object deviation only

  const double goal_u = exact_step(sc, sc.split(x_nom), u_nom).q_u[0];

  UnilateralReport rep;
  rep.kappa = kappa;
  auto run_case = [&](double dx_obj) {
    UnilateralCase c;
    c.dx0 = dx_obj;
    Eigen::VectorXd dx = Eigen::VectorXd::Zero(2);
    dx[0] = dx_obj;
    const Eigen::VectorXd dv = one_step_lqr(lin.A, lin.B, P1, dx);
    c.dv0 = dv[0];
    c.lin_pred_obj = (lin.B * dv)[0];  // object motion the model credits to dv

    Eigen::VectorXd x_pert = x_nom + dx;
    Eigen::VectorXd u = u_nom + dv;
    const Configuration next = exact_step(sc, sc.split(x_pert), u);
    c.exact_obj = next.q_u[0] - x_pert[0];
    c.goal_dist_before = std::abs(x_pert[0] - goal_u);
    c.goal_dist_after = std::abs(next.q_u[0] - goal_u);
    return c;
  };

  rep.push = run_case(-0.02);
  rep.pull = run_case(+0.02);
  return rep;
}

}  // namespace csc
