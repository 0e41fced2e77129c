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

#include "csc/scene.hpp"

#include <Eigen/Eigenvalues>

namespace csc {

namespace {

bool is_planar(Body::Frame f) {
  return f == Body::Frame::kPlanarXy || f == Body::Frame::kPlanarSe2;
}

void validate_pair(const SceneModel& sc, const ContactPair& p, int idx) {
  const int nb = static_cast<int>(sc.bodies.size());
  if (p.body_a < 0 || p.body_a >= nb || p.body_b < 0 || p.body_b >= nb || p.body_a == p.body_b) {
    throw ConfigError("contact pair " + std::to_string(idx) + ": invalid body indices");
  }
  if (p.mu < 0.0) {
    throw ConfigError("contact pair " + std::to_string(idx) + ": mu must be >= 0");
  }
  const Body& a = sc.bodies[static_cast<size_t>(p.body_a)];
  const Body& b = sc.bodies[static_cast<size_t>(p.body_b)];

  const bool both_line = a.frame == Body::Frame::kLine && b.frame == Body::Frame::kLine;
  if (both_line) {
    if (p.frictional) {
      throw ConfigError("contact pair " + std::to_string(idx) +
                        ": line contacts have no tangent direction");
    }
    if ((a.axis - b.axis).norm() > 1e-12) {
      throw ConfigError("contact pair " + std::to_string(idx) + ": bodies on different lines");
    }
    return;
  }

  const bool a_plane = a.kind == Body::Kind::kHalfPlane;
  const bool b_plane = b.kind == Body::Kind::kHalfPlane;
  if (a_plane && b_plane) {
    throw ConfigError("contact pair " + std::to_string(idx) +
                      ": unsupported primitive pair (half-plane vs half-plane)");
  }
  if (a_plane || b_plane) {
    const Body& other = a_plane ? b : a;
    if (other.kind != Body::Kind::kDisc || !is_planar(other.frame)) {
      throw ConfigError("contact pair " + std::to_string(idx) +
                        ": unsupported primitive pair (half-plane needs a planar disc)");
    }
    return;
  }

  if (!is_planar(a.frame) || !is_planar(b.frame)) {
    throw ConfigError("contact pair " + std::to_string(idx) +
                      ": unsupported primitive pair (mixed line/planar frames)");
  }
  if (a.kind == Body::Kind::kPoint && b.kind == Body::Kind::kPoint) {
    throw ConfigError("contact pair " + std::to_string(idx) +
                      ": unsupported primitive pair (planar point vs point)");
  }
}

}  // namespace

void SceneModel::validate() const {
  if (h <= 0.0) throw ConfigError("time step h must be > 0");
  if (kappa <= 0.0) throw ConfigError("kappa must be > 0");
  if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("epsilon must lie in [0, 1]");
  if (M_u.rows() != M_u.cols()) throw ConfigError("M_u must be square");
  if (n_u() > 0) {
    if ((M_u - M_u.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw ConfigError("M_u must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M_u);
    if (es.eigenvalues().minCoeff() <= 0.0) throw ConfigError("M_u must be positive definite");
  }
  if ((K_a.array() <= 0.0).any()) throw ConfigError("K_a entries must be > 0");
  if (tau_u.size() != n_u()) throw ConfigError("tau_u size must equal n_u");
  if (tau_a.size() != n_a()) throw ConfigError("tau_a size must equal n_a");

  for (size_t i = 0; i < bodies.size(); ++i) {
    const Body& b = bodies[i];
    if (b.frame == Body::Frame::kStatic) continue;
    const int block = b.actuated ? n_a() : n_u();
    if (b.offset < 0 || b.offset + b.dof() > block) {
      throw ConfigError("body " + std::to_string(i) + " exceeds its coordinate block");
    }
    if (b.kind == Body::Kind::kDisc && b.radius <= 0.0) {
      throw ConfigError("body " + std::to_string(i) + ": disc radius must be > 0");
    }
  }
  for (size_t i = 0; i < pairs.size(); ++i) {
    validate_pair(*this, pairs[i], static_cast<int>(i));
  }
}

}  // namespace csc
