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
#include <vector>

#include "csc/scenarios.hpp"
#include "csc/scene.hpp"

namespace csc {

struct CostWeights {
  Eigen::MatrixXd Q_t;  // running state weight (PSD)
  Eigen::MatrixXd R_t;  // input weight (PD)
  Eigen::MatrixXd Q_T;  // terminal state weight (PSD)
};

/// Warm-start trajectory: states x_ref (T+1 rows), inputs v_ref (T rows).
struct ReferencePlan {
  Eigen::MatrixXd x_ref;
  Eigen::MatrixXd v_ref;

  int horizon() const { return static_cast<int>(v_ref.rows()); }
  Eigen::VectorXd goal() const { return x_ref.row(x_ref.rows() - 1); }
};

struct Plan {
  Eigen::MatrixXd x_opt;  // (T+1) x n_x, exact smoothed rollout of v_opt
  Eigen::MatrixXd v_opt;  // T x n_a
  std::vector<Eigen::MatrixXd> per_particle_x;  // one rollout per particle (MP)
  bool converged = false;
  double final_cost = 0.0;
  int iterations = 0;
  std::vector<double> cost_history;  // accepted-iterate objective values
  Eigen::VectorXd goal;              // tracked terminal reference
  double kappa = 0.0;

  int horizon() const { return static_cast<int>(v_opt.rows()); }
};

struct TrajoptOptions {
  double tol = 1e-6;          // gradient infinity-norm
  double min_decrease = 1e-10;
  int max_iters = 500;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  double penalty_weight = 1e3;
  double kappa = 1e5;
  uint64_t seed = 0;
  int threads = 1;

  // Box bounds (empty = unbounded) and finger non-collision penalty inputs.
  Eigen::VectorXd x_lo, x_hi, v_lo, v_hi;
  std::vector<std::pair<int, int>> noncollide_bodies;

  enum class Robust { kMean, kSoftmax } robust = Robust::kMean;
  double softmax_lambda = 20.0;
};

/// Chains smoothed steps: x_{t+1} = f_kappa(x_t, v_t). Returns (T+1) rows.
Eigen::MatrixXd rollout_open_loop(const SceneModel& scene, const Eigen::VectorXd& x0,
                                  const Eigen::MatrixXd& v_seq, double kappa);

/// sum_{t=1..T-1} |x_t - goal|^2_Qt + |x_T - goal|^2_QT + sum_t |v_t|^2_Rt
double traj_cost(const Eigen::MatrixXd& x_seq, const Eigen::MatrixXd& v_seq,
                 const CostWeights& weights, const Eigen::VectorXd& goal);

/// Gradient of traj_cost(rollout(v_seq)) w.r.t. v_seq by reverse accumulation
/// through the step linearizations.
Eigen::MatrixXd traj_cost_gradient(const SceneModel& scene, const Eigen::VectorXd& x0,
                                   const Eigen::MatrixXd& v_seq, const CostWeights& weights,
                                   const Eigen::VectorXd& goal, double kappa);

/// Single-parameter trajectory optimization: projected-free gradient descent
/// with backtracking over the input sequence (single shooting), box bounds
/// and non-collision handled by quadratic-hinge penalties.
Plan sp_trajopt(const SceneModel& scene, const ShapeParam& p, const ReferencePlan& reference,
                const CostWeights& weights, const TrajoptOptions& opts);

/// Multi-parameter trajectory optimization: one shared input sequence that
/// minimizes the average (or softmax) cost over the particle scenes. The
/// returned x_opt is the rollout under the first (nominal) particle.
Plan mp_trajopt(const SceneFamily& family, const std::vector<ShapeParam>& particles,
                const ReferencePlan& reference, const CostWeights& weights,
                const TrajoptOptions& opts);

/// (1/lambda) log mean exp(lambda J_i), computed with a max shift.
double softmax_robust_cost(const std::vector<double>& costs, double lambda);

struct ReferenceOptions {
  double press = 0.01;  // commanded surface engagement depth
  uint64_t seed = 0;
};

/// Straight-line object interpolation with fingers servo-tracking
/// contact-offset slots; stands in for externally planned references.
ReferencePlan generate_reference(const Scenario& scenario, const Eigen::VectorXd& x0,
                                 const Eigen::VectorXd& goal_pose, int T,
                                 const ReferenceOptions& opts = {});

/// Default options wired to a scenario's boxes and finger pairs.
TrajoptOptions default_trajopt_options(const Scenario& scenario);

/// The tracking weights in common use, adapted to the scenario dimensions
/// (object entries 10 / terminal 1000, robot entries 0.1, inputs 5).
CostWeights default_cost_weights(int n_u, int n_a);

}  // namespace csc
