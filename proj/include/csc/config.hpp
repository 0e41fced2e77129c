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

#include <string>

#include <json.hpp>

#include "csc/lqr.hpp"
#include "csc/rollout.hpp"
#include "csc/scenarios.hpp"
#include "csc/trajopt.hpp"

namespace csc {

/// Fully-validated run description. Every field is defaulted before any
/// computation starts and echoed into outputs for provenance.
struct RunConfig {
  ScenarioSpec scenario_spec;
  int horizon = 20;
  Eigen::VectorXd start_pose;  // object pose
  Eigen::VectorXd goal_pose;
  double clearance = 0.045;
  double press = 0.01;

  CostWeights weights;      // trajectory-optimization tracking weights
  LqrWeights lqr_weights;   // stabilization weights
  std::string kp_weight_order = "z_first";

  double kappa_plan = 1e5;
  double kappa_gain = 800.0;
  std::string controller = "lqr";  // open_loop | lqr | kp_lqr
  PerturbationSpec perturbation;
  uint64_t seed = 0;
  std::string out_dir = "out";
  int substeps = 4;
  int threads = 0;  // 0 = hardware

  std::string particles;  // MP shape letters, e.g. "abc"; empty = SP
  std::vector<double> kappa_list{160.0, 800.0};
  std::string reference_file;  // optional externally planned reference

  TrajoptOptions optimizer;  // boxes filled from the scenario at build time

  nlohmann::json echo;  // the fully-defaulted config
};

/// Parses and validates a JSON config; unknown keys are rejected.
RunConfig load_config(const std::string& path);
RunConfig config_from_json(const nlohmann::json& j);

/// Scenario spec <-> JSON (lossless round-trip).
nlohmann::json scenario_spec_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_spec_from_json(const nlohmann::json& j);

/// Diagonal weight vector adapted to a block layout of n_u + n_a entries.
/// Accepts a scalar (uniform), a full-length diagonal, or the common
/// 9-entry published layout (3 object + 6 robot entries, truncated to fit).
Eigen::VectorXd adapt_state_diag(const nlohmann::json& j, int n_u, int n_a,
                                 const std::string& field);
Eigen::VectorXd adapt_input_diag(const nlohmann::json& j, int n_a, const std::string& field);

}  // namespace csc
