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

#include "csc/scenarios.hpp"

#include <cmath>

namespace csc {

double shape_radius(char shape) {
  switch (shape) {
    case 'a': return 0.14;
    case 'b': return 0.13;
    case 'c': return 0.15;
  }
  throw ConfigError(std::string("unknown shape preset '") + shape + "' (expected a, b, or c)");
}

ScenarioSpec ball1d_spec(const Ball1dOptions& opts) {
  ScenarioSpec s;
  s.name = "ball1d";
  s.kind = ScenarioSpec::Kind::kLine;
  s.object_mass = opts.mass;
  s.object_radius = opts.radius;
  s.object_length = 0.0;
  s.mu = 0.0;
  s.finger_radius = 0.0;
  s.stiffness = opts.stiffness;
  s.h = opts.h;
  s.epsilon = opts.epsilon;
  s.gap = opts.gap;
  s.workspace_halfwidth = 2.0;
  s.command_halfwidth = 2.0;
  return s;
}

ScenarioSpec planar_push_spec(char shape, const PlanarPushOptions& opts) {
  ScenarioSpec s;
  s.name = std::string("planar_push_") + shape;
  s.kind = ScenarioSpec::Kind::kPlanar;
  s.object_mass = opts.mass;
  s.object_radius = shape_radius(shape);
  s.object_length = 0.5;
  s.mu = opts.mu;
  s.finger_radius = opts.finger_radius;
  s.stiffness = opts.stiffness;
  s.h = opts.h;
  s.epsilon = opts.epsilon;
  return s;
}

namespace {

SceneModel build_scene(const ScenarioSpec& spec) {
  SceneModel sc;
  sc.h = spec.h;
  sc.epsilon = spec.epsilon;
  sc.kappa = spec.kappa_plan;

  if (spec.kind == ScenarioSpec::Kind::kLine) {
    sc.M_u = Eigen::MatrixXd::Constant(1, 1, spec.object_mass);
    sc.K_a = Eigen::VectorXd::Constant(1, spec.stiffness);
    sc.tau_u = Eigen::VectorXd::Zero(1);
    sc.tau_a = Eigen::VectorXd::Zero(1);

    Body object;
    object.kind = Body::Kind::kDisc;
    object.frame = Body::Frame::kLine;
    object.actuated = false;
    object.offset = 0;
    object.radius = spec.object_radius;
    object.name = "ball";

    Body finger;
    finger.kind = Body::Kind::kPoint;
    finger.frame = Body::Frame::kLine;
    finger.actuated = true;
    finger.offset = 0;
    finger.name = "finger";

    sc.bodies = {object, finger};
    // Finger approaches from the left (smaller coordinate side).
    sc.pairs = {{1, 0, 0.0, false}};
  } else {
    const double izz = 0.5 * spec.object_mass * spec.object_radius * spec.object_radius;
    sc.M_u = Eigen::Vector3d(spec.object_mass, spec.object_mass, izz).asDiagonal();
    sc.K_a = Eigen::VectorXd::Constant(4, spec.stiffness);
    sc.tau_u = Eigen::VectorXd::Zero(3);
    sc.tau_a = Eigen::VectorXd::Zero(4);

    Body object;
    object.kind = Body::Kind::kDisc;
    object.frame = Body::Frame::kPlanarSe2;
    object.actuated = false;
    object.offset = 0;
    object.radius = spec.object_radius;
    object.name = "cylinder";
    sc.bodies.push_back(object);

    for (int k = 0; k < 2; ++k) {
      Body finger;
      finger.kind = Body::Kind::kDisc;
      finger.frame = Body::Frame::kPlanarXy;
      finger.actuated = true;
      finger.offset = 2 * k;
      finger.radius = spec.finger_radius;
      finger.name = "finger" + std::to_string(k);
      sc.bodies.push_back(finger);
      sc.pairs.push_back({1 + k, 0, spec.mu, true});
    }
  }

  sc.params.p = Eigen::VectorXd::Constant(1, spec.object_radius);
  sc.validate();
  return sc;
}

}  // namespace

SceneModel Scenario::scene_with_radius_delta(double dr) const {
  ScenarioSpec s = spec;
  s.object_radius += dr;
  if (s.object_radius <= 0.0) throw ConfigError("perturbed radius must stay > 0");
  return build_scene(s);
}

Scenario build_scenario(const ScenarioSpec& spec) {
  Scenario s;
  s.spec = spec;
  s.scene = build_scene(spec);

  const int nu = s.scene.n_u();
  const int na = s.scene.n_a();
  s.x_lo.resize(nu + na);
  s.x_hi.resize(nu + na);
  s.v_lo = Eigen::VectorXd::Constant(na, -spec.command_halfwidth);
  s.v_hi = Eigen::VectorXd::Constant(na, spec.command_halfwidth);

  if (spec.kind == ScenarioSpec::Kind::kLine) {
    s.x_lo << -spec.workspace_halfwidth, -spec.command_halfwidth;
    s.x_hi << spec.workspace_halfwidth, spec.command_halfwidth;
    s.x_init.resize(2);
    s.x_init << spec.gap + spec.object_radius + spec.finger_radius, 0.0;
  } else {
    const double w = spec.workspace_halfwidth;
    const double c = spec.command_halfwidth;
    s.x_lo << -w, -w, -4.0 * M_PI, -c, -c, -c, -c;
    s.x_hi << w, w, 4.0 * M_PI, c, c, c, c;
    Eigen::Vector3d pose(0.0, 0.0, 0.0);
    Eigen::Vector3d goal(0.25, 0.0, 0.0);
    s.x_init.resize(7);  // placeholder; overwritten below via seated_state
    s.finger_body_pairs = {{1, 2}};
    s.x_init = seated_state(s, pose, goal, 0.045);
  }
  return s;
}

Scenario build_ball1d(const Ball1dOptions& opts) { return build_scenario(ball1d_spec(opts)); }

Scenario build_planar_push(char shape, const PlanarPushOptions& opts) {
  return build_scenario(planar_push_spec(shape, opts));
}

bool is_preset_name(const std::string& name) {
  for (const auto& p : preset_names()) {
    if (p == name) return true;
  }
  return false;
}

std::vector<std::string> preset_names() {
  return {"ball1d", "planar_push_a", "planar_push_b", "planar_push_c"};
}

Scenario build_preset(const std::string& name) {
  if (name == "ball1d") return build_ball1d();
  if (name == "planar_push_a") return build_planar_push('a');
  if (name == "planar_push_b") return build_planar_push('b');
  if (name == "planar_push_c") return build_planar_push('c');
  throw ConfigError("unknown scenario preset '" + name + "'");
}

Eigen::VectorXd seated_state(const Scenario& s, const Eigen::VectorXd& obj_pose,
                             const Eigen::VectorXd& goal_pose, double clearance) {
  if (s.spec.kind == ScenarioSpec::Kind::kLine) {
    if (obj_pose.size() != 1 || goal_pose.size() != 1) {
      throw ConfigError("line scenario poses have one coordinate");
    }
    Eigen::VectorXd x(2);
    x << obj_pose[0], obj_pose[0] - s.spec.object_radius - s.spec.finger_radius - clearance;
    return x;
  }
  if (obj_pose.size() != 3 || goal_pose.size() != 3) {
    throw ConfigError("planar scenario poses have three coordinates (x, y, theta)");
  }
  Eigen::Vector2d d = goal_pose.head<2>() - obj_pose.head<2>();
  if (d.norm() < 1e-9) d = Eigen::Vector2d(1.0, 0.0);
  d.normalize();
  const double back = std::atan2(-d.y(), -d.x());
  const double spread = 0.6;  // rad; antipodal-ish seat behind the object
  const double dist = s.spec.object_radius + s.spec.finger_radius + clearance;

  Eigen::VectorXd x(7);
  x.head<3>() = obj_pose;
  for (int k = 0; k < 2; ++k) {
    const double ang = back + (k == 0 ? spread : -spread);
    x.segment<2>(3 + 2 * k) =
        obj_pose.head<2>() + dist * Eigen::Vector2d(std::cos(ang), std::sin(ang));
  }
  return x;
}

std::vector<ShapeParam> shape_particles(const Scenario& s, const std::string& shapes,
                                        const Eigen::VectorXd& obj_pose,
                                        const Eigen::VectorXd& goal_pose, double clearance) {
  std::vector<ShapeParam> out;
  for (char c : shapes) {
    ShapeParam p;
    p.p = Eigen::VectorXd::Constant(1, shape_radius(c));
    ScenarioSpec spec = s.spec;
    p.x_init = [spec, obj_pose, goal_pose, clearance](const Eigen::VectorXd& pv) {
      ScenarioSpec sp = spec;
      sp.object_radius = pv[0];
      return seated_state(build_scenario(sp), obj_pose, goal_pose, clearance);
    };
    out.push_back(std::move(p));
  }
  return out;
}

SceneFamily scene_family(const Scenario& s) {
  const ScenarioSpec spec = s.spec;
  return [spec](const ShapeParam& p) {
    ScenarioSpec sp = spec;
    if (p.p.size() > 0) sp.object_radius = p.p[0];
    Scenario built = build_scenario(sp);
    Eigen::VectorXd x0 = p.x_init ? p.x_init(p.p) : built.x_init;
    return std::make_pair(built.scene, x0);
  };
}

}  // namespace csc
