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

#include "csc/scene.hpp"

namespace csc {

/// One contact pair at a configuration. J_n maps generalized velocity to the
/// gap rate (positive = separating); J_t spans the planar contact tangent.
struct ContactInfo {
  double phi = 0.0;
  Eigen::RowVectorXd J_n;  // 1 x n_x
  Eigen::MatrixXd J_t;     // t_dim x n_x, t_dim in {0, 1}
  double mu = 0.0;
  int pair_id = 0;

  int t_dim() const { return static_cast<int>(J_t.rows()); }
};

/// Signed distances and contact Jacobians for every declared pair.
/// Throws GeometryError when a pair penetrates beyond the cap and
/// ConfigError for unsupported primitive combinations (checked by
/// SceneModel::validate()).
std::vector<ContactInfo> contact_kernel(const SceneModel& scene, const Configuration& q);

}  // namespace csc
