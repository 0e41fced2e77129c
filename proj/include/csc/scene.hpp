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
#include <functional>
#include <string>
#include <vector>

#include "csc/common.hpp"

namespace csc {

/// Object / robot configuration split. The full state is x = [q_u; q_a].
struct Configuration {
  Eigen::VectorXd q_u;
  Eigen::VectorXd q_a;

  int n_u() const { return static_cast<int>(q_u.size()); }
  int n_a() const { return static_cast<int>(q_a.size()); }
  int n_x() const { return n_u() + n_a(); }

  Eigen::VectorXd x() const {
    Eigen::VectorXd out(n_x());
    out << q_u, q_a;
    return out;
  }

  static Configuration FromX(const Eigen::VectorXd& x, int n_u) {
    Configuration c;
    c.q_u = x.head(n_u);
    c.q_a = x.tail(x.size() - n_u);
    return c;
  }
};

/// Dynamics parameter (e.g. object radius) with the initial condition it
/// induces. x_init may be empty for scenes without a parameterized start.
struct ShapeParam {
  Eigen::VectorXd p;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> x_init;
};

/// Rigid primitive bound to a block of generalized coordinates.
struct Body {
  enum class Kind { kPoint, kDisc, kHalfPlane };
  // How the body's pose is read from the state vector:
  //  kLine      one coordinate, position along `axis` from `anchor`
  //  kPlanarXy  two coordinates (x, y), no rotation DoF
  //  kPlanarSe2 three coordinates (x, y, theta)
  //  kStatic    no coordinates; pose fixed by anchor/axis
  enum class Frame { kLine, kPlanarXy, kPlanarSe2, kStatic };

  Kind kind = Kind::kPoint;
  Frame frame = Frame::kStatic;
  bool actuated = false;  // robot block when true, object block otherwise
  int offset = 0;         // first coordinate inside its block
  double radius = 0.0;    // discs only
  Eigen::Vector2d anchor = Eigen::Vector2d::Zero();  // line origin or fixed position
  Eigen::Vector2d axis = Eigen::Vector2d::UnitX();   // line direction / half-plane outward normal
  double plane_offset = 0.0;  // half-plane surface: axis . p == plane_offset
  std::string name;

  int dof() const {
    switch (frame) {
      case Frame::kLine: return 1;
      case Frame::kPlanarXy: return 2;
      case Frame::kPlanarSe2: return 3;
      case Frame::kStatic: return 0;
    }
    return 0;
  }
};

/// Declared contact pair. t_dim = 1 when frictional, 0 otherwise.
/// For pairs of line-frame bodies, body_a is the body on the smaller-
/// coordinate side (the gap is the signed axial separation).
struct ContactPair {
  int body_a = 0;
  int body_b = 0;
  double mu = 0.0;
  bool frictional = false;
};

/// Everything needed to evaluate one quasi-dynamic contact step.
/// Immutable after construction; safe to share across threads.
struct SceneModel {
  double h = 0.1;        // time step [s]
  double epsilon = 1.0;  // inertia-role constant in [0, 1]
  double kappa = 1e5;    // default barrier parameter

  Eigen::MatrixXd M_u;   // n_u x n_u object mass matrix (SPD)
  Eigen::VectorXd K_a;   // n_a actuation stiffness diagonal (> 0)
  Eigen::VectorXd tau_u; // constant generalized forces
  Eigen::VectorXd tau_a;

  std::vector<Body> bodies;
  std::vector<ContactPair> pairs;
  ShapeParam params;

  int n_u() const { return static_cast<int>(M_u.rows()); }
  int n_a() const { return static_cast<int>(K_a.size()); }
  int n_x() const { return n_u() + n_a(); }

  Configuration split(const Eigen::VectorXd& x) const { return Configuration::FromX(x, n_u()); }

  /// Global index of coordinate k of `body` within x = [q_u; q_a].
  int coord_index(const Body& body, int k) const {
    return (body.actuated ? n_u() : 0) + body.offset + k;
  }

  /// Throws ConfigError on inconsistent dimensions or unsupported pairs.
  void validate() const;
};

}  // namespace csc
