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

#include <optional>
#include <string>

#include <json.hpp>

#include "csc/lqr.hpp"
#include "csc/rollout.hpp"
#include "csc/trajopt.hpp"

namespace csc {

/// Summary half of a persisted sweep; save_report output re-parses into this.
struct SweepSummary {
  int samples = 0;
  int successes = 0;
  bool delta_defined = false;
  double delta_pos = 0.0;
  double delta_ang = 0.0;
  double ci95_pos = 0.0;
  double ci95_ang = 0.0;
  std::optional<double> eta_pos;  // vs named baseline, when paired
  std::optional<double> eta_ang;
  std::string baseline_name;
  uint64_t seed = 0;
  double kappa_plan = 0.0;
  double kappa_gain = 0.0;
  std::string controller;
  std::string git_describe;
};

/// Writes <name>.csv (per-rollout rows) and <name>_summary.json into dir.
/// Byte-stable for identical inputs. Optionally pairs against a previously
/// saved baseline summary to emit the relative cost.
void save_report(const SweepReport& report, const std::string& dir, const std::string& name,
                 const nlohmann::json& config_echo = {},
                 const std::string& baseline_summary_path = {});

SweepSummary load_summary(const std::string& path);

nlohmann::json plan_to_json(const Plan& plan);
Plan plan_from_json(const nlohmann::json& j);
void save_plan(const Plan& plan, const std::string& path,
               const nlohmann::json& config_echo = {});
Plan load_plan(const std::string& path);

nlohmann::json gains_to_json(const GainSchedule& gains);
GainSchedule gains_from_json(const nlohmann::json& j);
void save_gains(const GainSchedule& gains, const std::string& path);
GainSchedule load_gains(const std::string& path);

/// Externally planned reference: {"x_ref": [[...]], "v_ref": [[...]]}.
ReferencePlan load_reference(const std::string& path);
void save_reference(const ReferencePlan& ref, const std::string& path);

}  // namespace csc
