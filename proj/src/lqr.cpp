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

#include "csc/lqr.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "csc/linearize.hpp"

namespace csc {

GainSchedule tvlqr(const std::vector<Eigen::MatrixXd>& A_seq,
                   const std::vector<Eigen::MatrixXd>& B_seq,
                   const std::vector<Eigen::MatrixXd>& Q_seq,
                   const std::vector<Eigen::MatrixXd>& R_seq, const Eigen::MatrixXd& Q_T) {
  const size_t T = A_seq.size();
  if (B_seq.size() != T || Q_seq.size() != T || R_seq.size() != T) {
    throw ConfigError("tvlqr: sequence lengths must match");
  }
  if (T == 0) throw ConfigError("tvlqr: empty horizon");
  const int n = static_cast<int>(A_seq[0].rows());

  GainSchedule gs;
  gs.n_x = n;
  gs.K_seq.resize(T);
  gs.P_seq.resize(T + 1);
  gs.P_seq[T] = Q_T;

  for (int t = static_cast<int>(T) - 1; t >= 0; --t) {
    const Eigen::MatrixXd& A = A_seq[static_cast<size_t>(t)];
    const Eigen::MatrixXd& B = B_seq[static_cast<size_t>(t)];
    const Eigen::MatrixXd& P1 = gs.P_seq[static_cast<size_t>(t) + 1];
    const Eigen::MatrixXd M = R_seq[static_cast<size_t>(t)] + B.transpose() * P1 * B;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
      throw NumericError("tvlqr: R + B'PB not positive definite at t=" + std::to_string(t));
    }
    const Eigen::MatrixXd K = ldlt.solve(B.transpose() * P1 * A);
    Eigen::MatrixXd P =
        Q_seq[static_cast<size_t>(t)] +
        A.transpose() * (P1 - P1 * B * ldlt.solve(B.transpose() * P1)) * A;
    P = 0.5 * (P + P.transpose()).eval();
    gs.K_seq[static_cast<size_t>(t)] = K;
    gs.P_seq[static_cast<size_t>(t)] = P;
  }
  return gs;
}

GainSchedule tvlqr(const std::vector<Eigen::MatrixXd>& A_seq,
                   const std::vector<Eigen::MatrixXd>& B_seq, const LqrWeights& weights) {
  const size_t T = A_seq.size();
  return tvlqr(A_seq, B_seq, std::vector<Eigen::MatrixXd>(T, weights.Q),
               std::vector<Eigen::MatrixXd>(T, weights.R), weights.Q_T);
}

GainSchedule gains_along_plan(const SceneModel& scene, const Plan& plan,
                              const LqrWeights& weights, double kappa) {
  const int T = plan.horizon();
  std::vector<Eigen::MatrixXd> A_seq(static_cast<size_t>(T)), B_seq(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    try {
      const Linearization lin =
          linearize(scene, scene.split(plan.x_opt.row(t)), plan.v_opt.row(t), kappa);
      A_seq[static_cast<size_t>(t)] = lin.A;
      B_seq[static_cast<size_t>(t)] = lin.B;
    } catch (const NumericError& e) {
      throw NumericError("linearization failed at knot " + std::to_string(t) + ": " + e.what(),
                         e.residual());
    }
  }
  GainSchedule gs = tvlqr(A_seq, B_seq, weights);
  gs.kappa_gain = kappa;
  return gs;
}

KeypointSet rim_keypoints(double radius) {
  KeypointSet k;
  k.offsets = {{radius, 0.0}, {-radius, 0.0}, {0.0, radius}, {0.0, -radius}};
  return k;
}

Eigen::VectorXd keypoint_observe(const Eigen::Vector3d& object_pose, const KeypointSet& kps) {
  const double c = std::cos(object_pose[2]);
  const double s = std::sin(object_pose[2]);
  Eigen::VectorXd z(kps.n_z());
  for (int i = 0; i < kps.n_p(); ++i) {
    const Eigen::Vector2d& o = kps.offsets[static_cast<size_t>(i)];
    z[2 * i] = object_pose[0] + c * o.x() - s * o.y();
    z[2 * i + 1] = object_pose[1] + s * o.x() + c * o.y();
  }
  return z;
}

Eigen::MatrixXd keypoint_jacobian(const Eigen::Vector3d& object_pose, const KeypointSet& kps) {
  const double c = std::cos(object_pose[2]);
  const double s = std::sin(object_pose[2]);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(kps.n_z(), 3);
  for (int i = 0; i < kps.n_p(); ++i) {
    const Eigen::Vector2d& o = kps.offsets[static_cast<size_t>(i)];
    G(2 * i, 0) = 1.0;
    G(2 * i, 2) = -s * o.x() - c * o.y();
    G(2 * i + 1, 1) = 1.0;
    G(2 * i + 1, 2) = c * o.x() - s * o.y();
  }
  return G;
}

GainSchedule kp_lqr(const std::vector<Eigen::MatrixXd>& A_seq,
                    const std::vector<Eigen::MatrixXd>& B_seq, const Eigen::MatrixXd& pose_traj,
                    const KeypointSet& kps, const std::vector<Eigen::MatrixXd>& Q_seq,
                    const std::vector<Eigen::MatrixXd>& R_seq, const Eigen::MatrixXd& Q_T) {
  const size_t T = A_seq.size();
  if (pose_traj.rows() != static_cast<Eigen::Index>(T) + 1 || pose_traj.cols() != 3) {
    throw ConfigError("kp_lqr: pose trajectory must be (T+1) x 3");
  }
  if (T == 0) throw ConfigError("kp_lqr: empty horizon");
  const int nx = static_cast<int>(A_seq[0].rows());
  const int nz = kps.n_z();
  if (nx < 3) throw ConfigError("kp_lqr needs a planar object block");
  if (Q_T.rows() != nx + nz) throw ConfigError("kp_lqr: weights must match the expanded state");

  std::vector<Eigen::MatrixXd> Ae(T), Be(T);
  for (size_t t = 0; t < T; ++t) {
    const Eigen::MatrixXd G =
        keypoint_jacobian(pose_traj.row(static_cast<Eigen::Index>(t) + 1), kps);
    const Eigen::MatrixXd C = G * A_seq[t].topRows(3);
    const Eigen::MatrixXd D = G * B_seq[t].topRows(3);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nx + nz, nx + nz);
    A.topLeftCorner(nx, nx) = A_seq[t];
    A.block(nx, 0, nz, nx) = C;
    Eigen::MatrixXd B(nx + nz, B_seq[t].cols());
    B.topRows(nx) = B_seq[t];
    B.bottomRows(nz) = D;
    Ae[t] = std::move(A);
    Be[t] = std::move(B);
  }
  GainSchedule gs = tvlqr(Ae, Be, Q_seq, R_seq, Q_T);
  gs.layout = GainSchedule::Layout::kExpanded;
  gs.n_x = nx;
  gs.n_z = nz;
  return gs;
}

GainSchedule kp_lqr(const std::vector<Eigen::MatrixXd>& A_seq,
                    const std::vector<Eigen::MatrixXd>& B_seq, const Eigen::MatrixXd& pose_traj,
                    const KeypointSet& kps, const LqrWeights& weights_expanded) {
  const size_t T = A_seq.size();
  return kp_lqr(A_seq, B_seq, pose_traj, kps,
                std::vector<Eigen::MatrixXd>(T, weights_expanded.Q),
                std::vector<Eigen::MatrixXd>(T, weights_expanded.R), weights_expanded.Q_T);
}

Eigen::MatrixXd fold_keypoint_weights(const Eigen::MatrixXd& Q_x, const Eigen::MatrixXd& Q_z,
                                      int n_p) {
  if (Q_z.rows() != 2 || Q_z.cols() != 2) throw ConfigError("Q_z must be 2x2");
  if (Q_x.rows() < 2) throw ConfigError("Q_x needs a position block");
  Eigen::MatrixXd out = Q_x;
  out.topLeftCorner(2, 2) += static_cast<double>(n_p) * Q_z;
  return out;
}

Eigen::VectorXd one_step_lqr(const Eigen::MatrixXd& A0, const Eigen::MatrixXd& B0,
                             const Eigen::MatrixXd& P1, const Eigen::VectorXd& dx0) {
  const Eigen::MatrixXd M =
      B0.transpose() * P1 * B0 +
      1e-12 * Eigen::MatrixXd::Identity(B0.cols(), B0.cols());
  return M.ldlt().solve(-B0.transpose() * P1 * A0 * dx0);
}

LqrWeights vanilla_lqr_weights(int n_u, int n_a) {
  LqrWeights w;
  Eigen::VectorXd q(n_u + n_a), qT(n_u + n_a);
  q.head(n_u).setConstant(10.0);
  q.tail(n_a).setConstant(0.1);
  qT.head(n_u).setConstant(1000.0);
  qT.tail(n_a).setConstant(0.1);
  w.Q = q.asDiagonal();
  w.Q_T = qT.asDiagonal();
  w.R = Eigen::MatrixXd::Identity(n_a, n_a) * 5.0;
  return w;
}

LqrWeights kp_lqr_default_weights(int n_u, int n_a, int n_z, const std::string& order) {
  if (n_u != 3) throw ConfigError("expanded-state weights assume a planar object block");
  const int nx = n_u + n_a;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(nx + n_z);
  Eigen::VectorXd qT = Eigen::VectorXd::Zero(nx + n_z);
  if (order == "z_first") {
    // Leading diagonal block weights the keypoints, trailing one the robot.
    q.tail(n_z).setConstant(5.0);
    qT.tail(n_z).setConstant(20.0);
    q.segment(n_u, n_a).setConstant(0.0);
    qT.segment(n_u, n_a).setConstant(0.1);
  } else if (order == "x_first") {
    q.head(nx).setConstant(5.0);
    qT.head(nx).setConstant(20.0);
    q.tail(n_z).setConstant(0.0);
    qT.tail(n_z).setConstant(0.1);
  } else {
    throw ConfigError("kp weight order must be z_first or x_first");
  }
  LqrWeights w;
  w.Q = q.asDiagonal();
  w.Q_T = qT.asDiagonal();
  w.R = Eigen::MatrixXd::Identity(n_a, n_a) * 100.0;
  return w;
}

}  // namespace csc
