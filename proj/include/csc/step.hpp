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

#include "csc/contact.hpp"
#include "csc/scene.hpp"

namespace csc {

/// Quadratic data of the one-step program:
///   min 1/2 dq' Q dq + b' dq   subject to the contact cones.
struct QpData {
  Eigen::MatrixXd Q;  // diag(eps M_u / h, h K_a), SPD
  Eigen::VectorXd b;  // -h [tau_u; K_a (u - q_a) + tau_a]
  std::vector<ContactInfo> contacts;
};

QpData assemble_qp(const SceneModel& scene, const Configuration& q, const Eigen::VectorXd& u,
                   const std::vector<ContactInfo>& contacts);

struct StepContactDiag {
  int pair_id = 0;
  double phi = 0.0;          // gap at the start of the step
  double cone_margin = 0.0;  // w_n - mu |w_t| at the solution
};

/// One smoothed dynamics step together with its stationarity certificate.
struct StepResult {
  Configuration q_next;
  Eigen::VectorXd dq_star;
  double grad_norm = 0.0;  // final ||grad F||_inf (unscaled)
  double tol_used = 0.0;   // accepted threshold: scaled tol or the fp floor
  int newton_iters = 0;
  std::vector<StepContactDiag> contacts;
};

struct NewtonOptions {
  double tol = 1e-10;  // scaled by max(1, ||b||_inf)
  int max_iters = 100;
};

/// Barrier-smoothed quasi-dynamic step: minimizes
///   F(dq) = 1/2 dq' Q dq + b' dq - (1/kappa) sum_i B_i(J_i dq + [phi_i; 0])
/// by damped Newton with a strict-interior line search. Starts from dq = 0
/// when all gaps are positive; otherwise attempts a retraction along the
/// contact normals first.
StepResult smoothed_step(const SceneModel& scene, const Configuration& q, const Eigen::VectorXd& u,
                         double kappa, const NewtonOptions& opts = {});

struct ExactStepOptions {
  double kappa0 = 100.0;
  double kappa_max = 1e7;
  double tol = 1e-8;  // complementarity residual, scaled by max(1, ||b||_inf)
};

/// Unsmoothed plant step with diagnostics.
struct ExactStepInfo {
  Configuration q_next;
  Eigen::VectorXd dq;
  double comp_residual = 0.0;  // certified complementarity + KKT residual
  int continuation_rounds = 0;
  // Per contact: 0 inactive, 1 sticking/normal, 2 sliding (+t), 3 sliding (-t).
  std::vector<int> modes;
};

ExactStepInfo exact_step_info(const SceneModel& scene, const Configuration& q,
                              const Eigen::VectorXd& u, const ExactStepOptions& opts = {});

/// Exact (unsmoothed) step: kappa-continuation with warm starts followed by
/// an active-set polish, certified by the complementarity residual.
Configuration exact_step(const SceneModel& scene, const Configuration& q,
                         const Eigen::VectorXd& u);

}  // namespace csc
