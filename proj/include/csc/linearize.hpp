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
#include <utility>

#include "csc/scene.hpp"
#include "csc/step.hpp"

namespace csc {

struct Linearization {
  Eigen::MatrixXd A;  // n_x x n_x
  Eigen::MatrixXd B;  // n_x x n_a
  bool cond_warning = false;
  double cond_estimate = 0.0;
};

/// Sensitivities of the smoothed step via the implicit function theorem:
/// with H the converged barrier Hessian, solves H S = -d(grad F)/d(q, u) and
/// returns A = I + S_q, B = S_u. A condition estimate of H above the cap
/// attaches a warning to the result instead of failing.
Linearization linearize(const SceneModel& scene, const Configuration& q, const Eigen::VectorXd& u,
                        double kappa);

/// Central differences of smoothed_step; test oracle and `gradcheck` backend.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> finite_diff_linearize(const SceneModel& scene,
                                                                  const Configuration& q,
                                                                  const Eigen::VectorXd& u,
                                                                  double kappa, double step);

}  // namespace csc
