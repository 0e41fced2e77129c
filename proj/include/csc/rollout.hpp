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

#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "csc/lqr.hpp"
#include "csc/scenarios.hpp"
#include "csc/trajopt.hpp"

namespace csc {

/// Piecewise-linear (first-order hold) interpolation of plan knots and gain
/// entries over [0, T h]. Inputs and gains hold their last knot on the final
/// interval.
struct FohController {
  Eigen::MatrixXd x_knots;              // (T+1) x n_x
  Eigen::MatrixXd v_knots;              // T x n_a
  std::vector<Eigen::MatrixXd> k_knots; // T gains
  double h = 0.1;
  GainSchedule::Layout layout = GainSchedule::Layout::kPlain;
  KeypointSet keypoints;  // used by the expanded layout

  int horizon() const { return static_cast<int>(v_knots.rows()); }
  double duration() const { return h * horizon(); }

  Eigen::VectorXd x_nominal(double t) const;
  Eigen::VectorXd v_nominal(double t) const;
  Eigen::MatrixXd gain(double t) const;

  /// u(t) = v(t) + K(t) (x_foh(t) - x_mea)-signed per dv = -K dx, i.e.
  /// u = v - K (x_mea - x_foh). Expanded layouts append keypoint errors.
  Eigen::VectorXd command(double t, const Eigen::VectorXd& x_mea) const;
};

FohController build_foh(const Plan& plan, const GainSchedule& gains, double h,
                        const KeypointSet* kps = nullptr);

/// All-zero gain schedule (open-loop execution of a plan).
GainSchedule zero_gains(int T, int n_a, int n_x);

struct PlantOptions {
  enum class Kind { kExact, kSmoothed } kind = Kind::kExact;
  double kappa = 1e5;  // smoothed plant only
  int substeps = 4;
  Eigen::VectorXd v_lo, v_hi;            // command clamp box (empty = none)
  Eigen::VectorXd escape_lo, escape_hi;  // failure box (empty = disabled)
};

struct RolloutResult {
  Eigen::MatrixXd x_traj;  // (substeps*T + 1) x n_x, recorded at plant rate
  Eigen::MatrixXd u_traj;  // substeps*T x n_a
  bool success = true;
  int fail_substep = -1;
  std::string fail_reason;

  Eigen::VectorXd terminal() const { return x_traj.row(x_traj.rows() - 1); }
};

/// Plays the FOH controller against the chosen plant at h/substeps. The
/// substepped plant keeps the knot-rate quasi-dynamic flow consistent by
/// scaling (h, epsilon) -> (h/s, epsilon/s).
RolloutResult closed_loop_rollout(const SceneModel& scene, const FohController& controller,
                                  const Eigen::VectorXd& x_start, const PlantOptions& opts);

/// (Euclidean position error, |wrapped angle error|) between object poses.
std::pair<double, double> terminal_error(const Eigen::VectorXd& obj_mea,
                                         const Eigen::VectorXd& obj_ref);

struct PerturbationSpec {
  enum class Kind { kInitialPose, kShapeRadius } kind = Kind::kInitialPose;
  double dx0 = 0.025;
  double dy0 = 0.025;
  double dtheta0 = 5.0 * M_PI / 180.0;
  double dr0 = 0.01;
  int samples = 50;
  uint64_t seed = 0;
};

struct SweepRecord {
  int sample_id = 0;
  Eigen::VectorXd perturbation;  // (dx[,dy,dtheta]) or (dr)
  double pos_err = 0.0;
  double ang_err = 0.0;
  bool success = true;
};

struct SweepReport {
  std::vector<SweepRecord> records;
  bool delta_defined = false;
  double delta_pos = 0.0;  // mean over successful rollouts
  double delta_ang = 0.0;
  double ci95_pos = 0.0;  // normal-approximation half-widths
  double ci95_ang = 0.0;

  double kappa_plan = 0.0;
  double kappa_gain = 0.0;
  std::string controller;
  uint64_t seed = 0;
  PerturbationSpec spec;

  int success_count() const;
};

/// Rolls the controller out under seeded perturbations and aggregates the
/// terminal tracking errors. Bitwise deterministic for a given seed/spec
/// regardless of thread count.
SweepReport run_sweep(const Scenario& scenario, const Plan& plan, const GainSchedule* gains,
                      const PerturbationSpec& spec, const PlantOptions& plant_opts,
                      int threads = 1);

/// Relative cost between two sweeps: eta = delta_b / delta_a.
double eta(double delta_b, double delta_a);

/// Recomputes gains per kappa and sweeps each schedule.
std::vector<std::pair<double, SweepReport>> kappa_study(const Scenario& scenario, const Plan& plan,
                                                        const LqrWeights& weights,
                                                        const std::vector<double>& kappa_list,
                                                        const PerturbationSpec& spec,
                                                        const PlantOptions& plant_opts,
                                                        int threads = 1);

/// Push/overshoot analysis on the 1-D fixture: what the smoothed
/// linearization predicts, what the one-step controller commands, and what
/// the exact plant does.
struct UnilateralCase {
  double dx0 = 0.0;            // object deviation from the nominal
  double dv0 = 0.0;            // one-step command correction
  double lin_pred_obj = 0.0;   // object motion predicted by A dx + B dv
  double exact_obj = 0.0;      // object motion under the exact plant
  double goal_dist_before = 0.0;
  double goal_dist_after = 0.0;
};

struct UnilateralReport {
  double kappa = 160.0;
  UnilateralCase push;
  UnilateralCase pull;
};

UnilateralReport unilateral_demo(double kappa = 160.0);

}  // namespace csc
