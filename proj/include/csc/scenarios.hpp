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
#include <utility>
#include <vector>

#include "csc/scene.hpp"

namespace csc {

/// Maps a shape parameter to the scene it induces plus the matching initial
/// state. Used by multi-parameter planning and by shape-perturbation sweeps.
using SceneFamily = std::function<std::pair<SceneModel, Eigen::VectorXd>(const ShapeParam&)>;

/// Desk-scale preset description; builds deterministically into a Scenario.
struct ScenarioSpec {
  std::string name = "planar_push_a";
  enum class Kind { kLine, kPlanar } kind = Kind::kPlanar;

  double object_mass = 1.0;
  double object_radius = 0.14;
  double object_length = 0.5;  // recorded; unused in the planar projection
  double mu = 0.5;
  double finger_radius = 0.02;
  double stiffness = 100.0;  // K_a diagonal value [N/m]
  double h = 0.1;
  double epsilon = 1.0;
  double kappa_plan = 1e5;
  double kappa_gain = 800.0;

  double workspace_halfwidth = 0.6;  // object pose box (X)
  double command_halfwidth = 0.8;    // finger command box (V)

  // 1-D preset extras
  double gap = 0.1;  // initial finger-object gap
};

struct Scenario {
  ScenarioSpec spec;
  SceneModel scene;
  Eigen::VectorXd x_init;

  // Box bounds over the full state / the command vector.
  Eigen::VectorXd x_lo, x_hi, v_lo, v_hi;
  // Finger body index pairs for non-collision penalties.
  std::vector<std::pair<int, int>> finger_body_pairs;

  int n_u() const { return scene.n_u(); }
  int n_a() const { return scene.n_a(); }

  /// Scene rebuilt with the object radius shifted by dr (shape sweeps).
  SceneModel scene_with_radius_delta(double dr) const;
};

struct Ball1dOptions {
  double mass = 1.0;
  double stiffness = 100.0;
  double radius = 0.1;
  double h = 0.1;
  double epsilon = 1.0;
  double gap = 0.1;
};

struct PlanarPushOptions {
  double mass = 1.0;
  double stiffness = 100.0;
  double mu = 0.5;
  double finger_radius = 0.02;
  double h = 0.1;
  double epsilon = 1.0;
};

ScenarioSpec ball1d_spec(const Ball1dOptions& opts = {});
ScenarioSpec planar_push_spec(char shape, const PlanarPushOptions& opts = {});

Scenario build_scenario(const ScenarioSpec& spec);
Scenario build_ball1d(const Ball1dOptions& opts = {});
Scenario build_planar_push(char shape, const PlanarPushOptions& opts = {});

/// Preset lookup by name ("ball1d", "planar_push_a" | _b | _c).
bool is_preset_name(const std::string& name);
Scenario build_preset(const std::string& name);
std::vector<std::string> preset_names();

/// Full state with fingers seated behind the object (relative to the push
/// direction toward `goal_pose`) at the given surface clearance.
Eigen::VectorXd seated_state(const Scenario& s, const Eigen::VectorXd& obj_pose,
                             const Eigen::VectorXd& goal_pose, double clearance);

/// Shape particle set from the preset radii table, e.g. shapes = "abc".
/// Each particle's x_init seats the fingers for that particle's radius.
std::vector<ShapeParam> shape_particles(const Scenario& s, const std::string& shapes,
                                        const Eigen::VectorXd& obj_pose,
                                        const Eigen::VectorXd& goal_pose, double clearance);

/// Scene family for multi-parameter planning over this scenario.
SceneFamily scene_family(const Scenario& s);

/// Radius of the named shape preset (a: 0.14, b: 0.13, c: 0.15).
double shape_radius(char shape);

}  // namespace csc
