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
#include <string>
#include <vector>

#include "csc/scene.hpp"
#include "csc/trajopt.hpp"

namespace csc {

/// Time-varying feedback gains and value matrices. Gains are stored positive
/// and applied as dv = -K dx.
struct GainSchedule {
  std::vector<Eigen::MatrixXd> K_seq;  // T gains, n_a x n_state
  std::vector<Eigen::MatrixXd> P_seq;  // T+1 value matrices
  enum class Layout { kPlain, kExpanded } layout = Layout::kPlain;
  int n_x = 0;
  int n_z = 0;  // keypoint block width for the expanded layout
  double kappa_gain = 0.0;  // smoothing used for the linearizations, if any

  int horizon() const { return static_cast<int>(K_seq.size()); }
  int n_state() const { return n_x + n_z; }
};

struct LqrWeights {
  Eigen::MatrixXd Q;    // running state weight
  Eigen::MatrixXd R;    // input weight (PD)
  Eigen::MatrixXd Q_T;  // terminal weight
};

/// Backward Riccati recursion:
///   P_T = Q_T,  K_t = (R_t + B' P_{t+1} B)^-1 B' P_{t+1} A,
///   P_t = Q_t + A'(P_{t+1} - P_{t+1} B (R_t + B' P_{t+1} B)^-1 B' P_{t+1}) A.
GainSchedule tvlqr(const std::vector<Eigen::MatrixXd>& A_seq,
                   const std::vector<Eigen::MatrixXd>& B_seq,
                   const std::vector<Eigen::MatrixXd>& Q_seq,
                   const std::vector<Eigen::MatrixXd>& R_seq, const Eigen::MatrixXd& Q_T);

GainSchedule tvlqr(const std::vector<Eigen::MatrixXd>& A_seq,
                   const std::vector<Eigen::MatrixXd>& B_seq, const LqrWeights& weights);

/// Linearizes the smoothed dynamics at every knot of the plan (with the gain
/// smoothing kappa) and runs tvlqr.
GainSchedule gains_along_plan(const SceneModel& scene, const Plan& plan,
                              const LqrWeights& weights, double kappa = 800.0);

/// Body-frame points observed on the object.
struct KeypointSet {
  std::vector<Eigen::Vector2d> offsets;
  int n_p() const { return static_cast<int>(offsets.size()); }
  int n_z() const { return 2 * n_p(); }
};

/// Four rim points (+-r, 0), (0, +-r).
KeypointSet rim_keypoints(double radius);

/// z_i = [x, y] + R(theta) offset_i, stacked.
Eigen::VectorXd keypoint_observe(const Eigen::Vector3d& object_pose, const KeypointSet& kps);

/// d z / d pose, n_z x 3.
Eigen::MatrixXd keypoint_jacobian(const Eigen::Vector3d& object_pose, const KeypointSet& kps);

/// LQR on the state expanded with keypoint observations. The keypoint error
/// block of the expanded dynamics matrix is zero by construction, so the
/// corresponding gain columns vanish identically.
GainSchedule kp_lqr(const std::vector<Eigen::MatrixXd>& A_seq,
                    const std::vector<Eigen::MatrixXd>& B_seq, const Eigen::MatrixXd& pose_traj,
                    const KeypointSet& kps, const std::vector<Eigen::MatrixXd>& Q_seq,
                    const std::vector<Eigen::MatrixXd>& R_seq, const Eigen::MatrixXd& Q_T);

GainSchedule kp_lqr(const std::vector<Eigen::MatrixXd>& A_seq,
                    const std::vector<Eigen::MatrixXd>& B_seq, const Eigen::MatrixXd& pose_traj,
                    const KeypointSet& kps, const LqrWeights& weights_expanded);

/// Folds a per-keypoint 2x2 weight into the position block of a plain state
/// weight (the small-angle keypoint-error approximation); theta untouched.
Eigen::MatrixXd fold_keypoint_weights(const Eigen::MatrixXd& Q_x, const Eigen::MatrixXd& Q_z,
                                      int n_p);

/// dv0 minimizing |A0 dx0 + B0 dv0|^2_P1 (1e-12 regularization on B'P B).
Eigen::VectorXd one_step_lqr(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& B0,
                             const Eigen::MatrixXd& P1, const Eigen::VectorXd& dx0);

/// Stock stabilization weights (object 10 / terminal 1000, robot 0.1, R 5).
LqrWeights vanilla_lqr_weights(int n_u, int n_a);

/// Stock expanded-state weights on the [x; z] layout. `order` resolves the
/// 8+6 diagonal vectors onto the expanded state: "z_first" reads them as
/// [keypoint block; robot block] (object pose unweighted), "x_first" as
/// [pose + robot; keypoint block].
LqrWeights kp_lqr_default_weights(int n_u, int n_a, int n_z, const std::string& order = "z_first");

}  // namespace csc
