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

#include "csc/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

namespace csc {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
  }
}

double get_num(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError("'" + key + "' must be a number");
  return j.at(key).get<double>();
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error in '" + path + "': " + e.what());
  }
  return j;
}

}  // namespace

nlohmann::json scenario_spec_to_json(const ScenarioSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["kind"] = spec.kind == ScenarioSpec::Kind::kLine ? "line" : "planar";
  j["object_mass"] = spec.object_mass;
  j["object_radius"] = spec.object_radius;
  j["object_length"] = spec.object_length;
  j["mu"] = spec.mu;
  j["finger_radius"] = spec.finger_radius;
  j["stiffness"] = spec.stiffness;
  j["h"] = spec.h;
  j["epsilon"] = spec.epsilon;
  j["kappa_plan"] = spec.kappa_plan;
  j["kappa_gain"] = spec.kappa_gain;
  j["workspace_halfwidth"] = spec.workspace_halfwidth;
  j["command_halfwidth"] = spec.command_halfwidth;
  j["gap"] = spec.gap;
  return j;
}

ScenarioSpec scenario_spec_from_json(const nlohmann::json& j) {
  static const std::set<std::string> keys = {
      "name", "kind", "object_mass", "object_radius", "object_length", "mu", "finger_radius",
      "stiffness", "h", "epsilon", "kappa_plan", "kappa_gain", "workspace_halfwidth",
      "command_halfwidth", "gap"};
  reject_unknown(j, keys, "scenario");
  ScenarioSpec s;
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (j.contains("kind")) {
    const std::string k = j.at("kind").get<std::string>();
    if (k == "line") {
      s.kind = ScenarioSpec::Kind::kLine;
    } else if (k == "planar") {
      s.kind = ScenarioSpec::Kind::kPlanar;
    } else {
      throw ConfigError("scenario kind must be 'line' or 'planar'");
    }
  }
  s.object_mass = get_num(j, "object_mass", s.object_mass);
  s.object_radius = get_num(j, "object_radius", s.object_radius);
  s.object_length = get_num(j, "object_length", s.object_length);
  s.mu = get_num(j, "mu", s.mu);
  s.finger_radius = get_num(j, "finger_radius", s.finger_radius);
  s.stiffness = get_num(j, "stiffness", s.stiffness);
  s.h = get_num(j, "h", s.h);
  s.epsilon = get_num(j, "epsilon", s.epsilon);
  s.kappa_plan = get_num(j, "kappa_plan", s.kappa_plan);
  s.kappa_gain = get_num(j, "kappa_gain", s.kappa_gain);
  s.workspace_halfwidth = get_num(j, "workspace_halfwidth", s.workspace_halfwidth);
  s.command_halfwidth = get_num(j, "command_halfwidth", s.command_halfwidth);
  s.gap = get_num(j, "gap", s.gap);
  if (s.object_mass <= 0 || s.object_radius <= 0 || s.h <= 0 || s.stiffness <= 0) {
    throw ConfigError("scenario physical parameters must be positive");
  }
  return s;
}

Eigen::VectorXd adapt_state_diag(const nlohmann::json& j, int n_u, int n_a,
                                 const std::string& field) {
  const int nx = n_u + n_a;
  if (j.is_number()) return Eigen::VectorXd::Constant(nx, j.get<double>());
  if (!j.is_array()) throw ConfigError("'" + field + "' must be a number or an array");
  std::vector<double> v = j.get<std::vector<double>>();
  Eigen::VectorXd out(nx);
  if (static_cast<int>(v.size()) == nx) {
    for (int i = 0; i < nx; ++i) out[i] = v[static_cast<size_t>(i)];
    return out;
  }
  if (v.size() == 9 && n_u <= 3 && n_a <= 6) {
    // Published layout: 3 object entries then 6 robot entries.
    for (int i = 0; i < n_u; ++i) out[i] = v[static_cast<size_t>(i)];
    for (int i = 0; i < n_a; ++i) out[n_u + i] = v[static_cast<size_t>(3 + i)];
    return out;
  }
  throw ConfigError("'" + field + "' has length " + std::to_string(v.size()) +
                    "; expected " + std::to_string(nx) + " (or the 9-entry published layout)");
}

Eigen::VectorXd adapt_input_diag(const nlohmann::json& j, int n_a, const std::string& field) {
  if (j.is_number()) return Eigen::VectorXd::Constant(n_a, j.get<double>());
  if (!j.is_array()) throw ConfigError("'" + field + "' must be a number or an array");
  std::vector<double> v = j.get<std::vector<double>>();
  Eigen::VectorXd out(n_a);
  if (static_cast<int>(v.size()) == n_a || (v.size() == 6 && n_a <= 6)) {
    for (int i = 0; i < n_a; ++i) out[i] = v[static_cast<size_t>(i)];
    return out;
  }
  throw ConfigError("'" + field + "' has length " + std::to_string(v.size()) + "; expected " +
                    std::to_string(n_a) + " (or the 6-entry published layout)");
}

RunConfig config_from_json(const nlohmann::json& raw) {
  static const std::set<std::string> top_keys = {
      "scenario", "scenario_overrides", "horizon", "start_pose", "goal_pose", "clearance",
      "press", "weights", "lqr_weights", "kp_weight_order", "kappa_plan", "kappa_gain",
      "controller", "perturbation", "seed", "out_dir", "substeps", "threads", "particles",
      "kappa_list", "reference_file", "optimizer"};
  reject_unknown(raw, top_keys, "config");

  RunConfig c;

  // Scenario: preset name or spec file, then field overrides.
  json scen_json;
  std::string scen_name = "planar_push_a";
  if (raw.contains("scenario")) {
    if (!raw.at("scenario").is_string()) throw ConfigError("'scenario' must be a string");
    scen_name = raw.at("scenario").get<std::string>();
  }
  if (is_preset_name(scen_name)) {
    scen_json = scenario_spec_to_json(build_preset(scen_name).spec);
  } else if (std::filesystem::exists(scen_name)) {
    scen_json = load_json_file(scen_name);
  } else {
    throw ConfigError("scenario '" + scen_name + "' is neither a preset nor a readable file");
  }
  if (raw.contains("scenario_overrides")) {
    for (auto it = raw.at("scenario_overrides").begin(); it != raw.at("scenario_overrides").end();
         ++it) {
      scen_json[it.key()] = it.value();
    }
  }
  c.scenario_spec = scenario_spec_from_json(scen_json);

  const bool planar = c.scenario_spec.kind == ScenarioSpec::Kind::kPlanar;
  const int n_u = planar ? 3 : 1;
  const int n_a = planar ? 4 : 1;

  if (raw.contains("horizon")) c.horizon = raw.at("horizon").get<int>();
  if (c.horizon < 4 || c.horizon > 64) throw ConfigError("horizon must lie in [4, 64]");

  c.start_pose = Eigen::VectorXd::Zero(n_u);
  c.goal_pose = Eigen::VectorXd::Zero(n_u);
  if (planar) c.goal_pose << 0.25, 0.1, 0.3;
  else {
    c.start_pose << c.scenario_spec.gap + c.scenario_spec.object_radius;
    c.goal_pose << c.start_pose[0] + 0.2;
  }
  auto read_pose = [&](const std::string& key, Eigen::VectorXd* pose) {
    if (!raw.contains(key)) return;
    const auto v = raw.at(key).get<std::vector<double>>();
    if (static_cast<int>(v.size()) != n_u) {
      throw ConfigError("'" + key + "' must have " + std::to_string(n_u) + " entries");
    }
    for (int i = 0; i < n_u; ++i) (*pose)[i] = v[static_cast<size_t>(i)];
  };
  read_pose("start_pose", &c.start_pose);
  read_pose("goal_pose", &c.goal_pose);

  c.clearance = get_num(raw, "clearance", c.clearance);
  c.press = get_num(raw, "press", c.press);

  c.weights = default_cost_weights(n_u, n_a);
  if (raw.contains("weights")) {
    const json& w = raw.at("weights");
    reject_unknown(w, {"q", "r", "q_terminal"}, "weights");
    if (w.contains("q")) c.weights.Q_t = adapt_state_diag(w.at("q"), n_u, n_a, "weights.q").asDiagonal();
    if (w.contains("r")) c.weights.R_t = adapt_input_diag(w.at("r"), n_a, "weights.r").asDiagonal();
    if (w.contains("q_terminal")) {
      c.weights.Q_T = adapt_state_diag(w.at("q_terminal"), n_u, n_a, "weights.q_terminal").asDiagonal();
    }
  }
  c.lqr_weights = vanilla_lqr_weights(n_u, n_a);
  if (raw.contains("lqr_weights")) {
    const json& w = raw.at("lqr_weights");
    reject_unknown(w, {"q", "r", "q_terminal"}, "lqr_weights");
    if (w.contains("q")) c.lqr_weights.Q = adapt_state_diag(w.at("q"), n_u, n_a, "lqr_weights.q").asDiagonal();
    if (w.contains("r")) c.lqr_weights.R = adapt_input_diag(w.at("r"), n_a, "lqr_weights.r").asDiagonal();
    if (w.contains("q_terminal")) {
      c.lqr_weights.Q_T =
          adapt_state_diag(w.at("q_terminal"), n_u, n_a, "lqr_weights.q_terminal").asDiagonal();
    }
  }
  if (raw.contains("kp_weight_order")) {
    c.kp_weight_order = raw.at("kp_weight_order").get<std::string>();
    if (c.kp_weight_order != "z_first" && c.kp_weight_order != "x_first") {
      throw ConfigError("kp_weight_order must be z_first or x_first");
    }
  }

  c.kappa_plan = get_num(raw, "kappa_plan", c.scenario_spec.kappa_plan);
  c.kappa_gain = get_num(raw, "kappa_gain", c.scenario_spec.kappa_gain);
  if (c.kappa_plan <= 0.0 || c.kappa_gain <= 0.0) throw ConfigError("kappa must be > 0");

  if (raw.contains("controller")) c.controller = raw.at("controller").get<std::string>();
  if (c.controller != "open_loop" && c.controller != "lqr" && c.controller != "kp_lqr") {
    throw ConfigError("controller must be open_loop, lqr, or kp_lqr");
  }

  if (raw.contains("perturbation")) {
    const json& p = raw.at("perturbation");
    reject_unknown(p, {"kind", "dx", "dy", "dtheta_deg", "dr", "samples", "seed"}, "perturbation");
    if (p.contains("kind")) {
      const std::string k = p.at("kind").get<std::string>();
      if (k == "initial_pose") {
        c.perturbation.kind = PerturbationSpec::Kind::kInitialPose;
      } else if (k == "shape_radius") {
        c.perturbation.kind = PerturbationSpec::Kind::kShapeRadius;
        c.perturbation.samples = 20;
      } else {
        throw ConfigError("perturbation kind must be initial_pose or shape_radius");
      }
    }
    c.perturbation.dx0 = get_num(p, "dx", c.perturbation.dx0);
    c.perturbation.dy0 = get_num(p, "dy", c.perturbation.dy0);
    c.perturbation.dtheta0 = get_num(p, "dtheta_deg", c.perturbation.dtheta0 * 180.0 / M_PI) *
                             M_PI / 180.0;
    c.perturbation.dr0 = get_num(p, "dr", c.perturbation.dr0);
    if (p.contains("samples")) c.perturbation.samples = p.at("samples").get<int>();
    if (p.contains("seed")) c.perturbation.seed = p.at("seed").get<uint64_t>();
    if (c.perturbation.dx0 < 0 || c.perturbation.dy0 < 0 || c.perturbation.dtheta0 < 0 ||
        c.perturbation.dr0 < 0) {
      throw ConfigError("perturbation bounds must be >= 0");
    }
    if (c.perturbation.samples < 1) throw ConfigError("perturbation samples must be >= 1");
  }

  if (raw.contains("seed")) {
    c.seed = raw.at("seed").get<uint64_t>();
    if (!raw.contains("perturbation") || !raw.at("perturbation").contains("seed")) {
      c.perturbation.seed = c.seed;
    }
  }
  if (raw.contains("out_dir")) c.out_dir = raw.at("out_dir").get<std::string>();
  if (raw.contains("substeps")) c.substeps = raw.at("substeps").get<int>();
  if (c.substeps < 1) throw ConfigError("substeps must be >= 1");
  if (raw.contains("threads")) c.threads = raw.at("threads").get<int>();
  if (raw.contains("particles")) {
    c.particles = raw.at("particles").get<std::string>();
    for (char ch : c.particles) {
      if (ch != 'a' && ch != 'b' && ch != 'c') {
        throw ConfigError("particles must name shapes from {a, b, c}");
      }
    }
  }
  if (raw.contains("kappa_list")) {
    c.kappa_list = raw.at("kappa_list").get<std::vector<double>>();
    if (c.kappa_list.empty()) throw ConfigError("kappa_list must be nonempty");
    for (double k : c.kappa_list) {
      if (k <= 0.0) throw ConfigError("kappa must be > 0");
    }
  }
  if (raw.contains("reference_file")) c.reference_file = raw.at("reference_file").get<std::string>();

  if (raw.contains("optimizer")) {
    const json& o = raw.at("optimizer");
    reject_unknown(o,
                   {"max_iters", "tol", "min_decrease", "penalty_weight", "robust",
                    "softmax_lambda"},
                   "optimizer");
    if (o.contains("max_iters")) c.optimizer.max_iters = o.at("max_iters").get<int>();
    c.optimizer.tol = get_num(o, "tol", c.optimizer.tol);
    c.optimizer.min_decrease = get_num(o, "min_decrease", c.optimizer.min_decrease);
    c.optimizer.penalty_weight = get_num(o, "penalty_weight", c.optimizer.penalty_weight);
    if (o.contains("robust")) {
      const std::string r = o.at("robust").get<std::string>();
      if (r == "mean") {
        c.optimizer.robust = TrajoptOptions::Robust::kMean;
      } else if (r == "softmax") {
        c.optimizer.robust = TrajoptOptions::Robust::kSoftmax;
      } else {
        throw ConfigError("optimizer robust must be mean or softmax");
      }
    }
    c.optimizer.softmax_lambda = get_num(o, "softmax_lambda", c.optimizer.softmax_lambda);
  }
  c.optimizer.kappa = c.kappa_plan;

  // Echo the fully-defaulted configuration for provenance.
  json echo;
  echo["scenario"] = scenario_spec_to_json(c.scenario_spec);
  echo["horizon"] = c.horizon;
  echo["start_pose"] = std::vector<double>(c.start_pose.data(), c.start_pose.data() + n_u);
  echo["goal_pose"] = std::vector<double>(c.goal_pose.data(), c.goal_pose.data() + n_u);
  echo["clearance"] = c.clearance;
  echo["press"] = c.press;
  auto diag = [](const Eigen::MatrixXd& m) {
    const Eigen::VectorXd d = m.diagonal();
    return std::vector<double>(d.data(), d.data() + d.size());
  };
  echo["weights"] = {{"q", diag(c.weights.Q_t)}, {"r", diag(c.weights.R_t)},
                     {"q_terminal", diag(c.weights.Q_T)}};
  echo["lqr_weights"] = {{"q", diag(c.lqr_weights.Q)}, {"r", diag(c.lqr_weights.R)},
                         {"q_terminal", diag(c.lqr_weights.Q_T)}};
  echo["kp_weight_order"] = c.kp_weight_order;
  echo["kappa_plan"] = c.kappa_plan;
  echo["kappa_gain"] = c.kappa_gain;
  echo["controller"] = c.controller;
  echo["perturbation"] = {
      {"kind", c.perturbation.kind == PerturbationSpec::Kind::kInitialPose ? "initial_pose"
                                                                           : "shape_radius"},
      {"dx", c.perturbation.dx0},
      {"dy", c.perturbation.dy0},
      {"dtheta_deg", c.perturbation.dtheta0 * 180.0 / M_PI},
      {"dr", c.perturbation.dr0},
      {"samples", c.perturbation.samples},
      {"seed", c.perturbation.seed}};
  echo["seed"] = c.seed;
  echo["out_dir"] = c.out_dir;
  echo["substeps"] = c.substeps;
  echo["threads"] = c.threads;
  echo["particles"] = c.particles;
  echo["kappa_list"] = c.kappa_list;
  echo["reference_file"] = c.reference_file;
  echo["optimizer"] = {{"max_iters", c.optimizer.max_iters},
                       {"tol", c.optimizer.tol},
                       {"min_decrease", c.optimizer.min_decrease},
                       {"penalty_weight", c.optimizer.penalty_weight},
                       {"robust",
                        c.optimizer.robust == TrajoptOptions::Robust::kMean ? "mean" : "softmax"},
                       {"softmax_lambda", c.optimizer.softmax_lambda}};
  c.echo = std::move(echo);
  return c;
}

RunConfig load_config(const std::string& path) { return config_from_json(load_json_file(path)); }

}  // namespace csc
