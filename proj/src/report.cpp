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

#include "csc/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "csc/version.hpp"

namespace csc {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error in '" + path + "': " + e.what());
  }
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError("'" + field + "' must be an array of rows");
  const auto rows = j.get<std::vector<std::vector<double>>>();
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXd m(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    if (static_cast<Eigen::Index>(rows[static_cast<size_t>(r)].size()) != nc) {
      throw ConfigError("'" + field + "' rows have inconsistent widths");
    }
    for (Eigen::Index c = 0; c < nc; ++c) m(r, c) = rows[static_cast<size_t>(r)][static_cast<size_t>(c)];
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError("'" + field + "' must be an array");
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_report(const SweepReport& report, const std::string& dir, const std::string& name,
                 const nlohmann::json& config_echo, const std::string& baseline_summary_path) {
  std::filesystem::create_directories(dir);

  const bool shape = report.spec.kind == PerturbationSpec::Kind::kShapeRadius;
  std::string csv = shape ? "sample_id,dr,pos_err_m,ang_err_rad,success\n"
                          : "sample_id,dx,dy,dtheta,pos_err_m,ang_err_rad,success\n";
  for (const auto& r : report.records) {
    csv += std::to_string(r.sample_id);
    if (shape) {
      csv += "," + fmt_double(r.perturbation.size() > 0 ? r.perturbation[0] : 0.0);
    } else {
      for (int k = 0; k < 3; ++k) {
        csv += "," + fmt_double(k < r.perturbation.size() ? r.perturbation[k] : 0.0);
      }
    }
    csv += "," + fmt_double(r.pos_err) + "," + fmt_double(r.ang_err);
    csv += r.success ? ",1\n" : ",0\n";
  }
  write_file(dir + "/" + name + ".csv", csv);

  json s;
  s["samples"] = static_cast<int>(report.records.size());
  s["successes"] = report.success_count();
  s["delta_defined"] = report.delta_defined;
  s["delta_terminal"] = {{"pos_m", report.delta_pos}, {"ang_rad", report.delta_ang}};
  s["ci95"] = {{"pos_m", report.ci95_pos}, {"ang_rad", report.ci95_ang}};
  s["seed"] = report.seed;
  s["kappa_plan"] = report.kappa_plan;
  s["kappa_gain"] = report.kappa_gain;
  s["controller"] = report.controller;
  s["perturbation_kind"] = shape ? "shape_radius" : "initial_pose";
  s["git_describe"] = kGitDescribe;
  if (!config_echo.is_null() && !config_echo.empty()) s["config"] = config_echo;
  if (!baseline_summary_path.empty()) {
    const SweepSummary base = load_summary(baseline_summary_path);
    if (base.delta_defined && report.delta_defined) {
      json e;
      e["baseline"] = baseline_summary_path;
      e["pos"] = eta(report.delta_pos, base.delta_pos);
      if (base.delta_ang != 0.0) e["ang"] = eta(report.delta_ang, base.delta_ang);
      s["eta_vs_baseline"] = std::move(e);
    }
  }
  write_file(dir + "/" + name + "_summary.json", s.dump(2) + "\n");
}

SweepSummary load_summary(const std::string& path) {
  const json j = load_json_file(path);
  SweepSummary s;
  s.samples = j.at("samples").get<int>();
  s.successes = j.at("successes").get<int>();
  s.delta_defined = j.at("delta_defined").get<bool>();
  s.delta_pos = j.at("delta_terminal").at("pos_m").get<double>();
  s.delta_ang = j.at("delta_terminal").at("ang_rad").get<double>();
  s.ci95_pos = j.at("ci95").at("pos_m").get<double>();
  s.ci95_ang = j.at("ci95").at("ang_rad").get<double>();
  s.seed = j.at("seed").get<uint64_t>();
  s.kappa_plan = j.at("kappa_plan").get<double>();
  s.kappa_gain = j.at("kappa_gain").get<double>();
  s.controller = j.at("controller").get<std::string>();
  s.git_describe = j.at("git_describe").get<std::string>();
  if (j.contains("eta_vs_baseline")) {
    s.eta_pos = j.at("eta_vs_baseline").at("pos").get<double>();
    if (j.at("eta_vs_baseline").contains("ang")) {
      s.eta_ang = j.at("eta_vs_baseline").at("ang").get<double>();
    }
    s.baseline_name = j.at("eta_vs_baseline").at("baseline").get<std::string>();
  }
  return s;
}

nlohmann::json plan_to_json(const Plan& plan) {
  json j;
  j["x_opt"] = matrix_to_json(plan.x_opt);
  j["v_opt"] = matrix_to_json(plan.v_opt);
  j["goal"] = vector_to_json(plan.goal);
  j["converged"] = plan.converged;
  j["final_cost"] = plan.final_cost;
  j["iterations"] = plan.iterations;
  j["kappa"] = plan.kappa;
  if (!plan.per_particle_x.empty()) {
    json pp = json::array();
    for (const auto& x : plan.per_particle_x) pp.push_back(matrix_to_json(x));
    j["per_particle_x"] = std::move(pp);
  }
  return j;
}

Plan plan_from_json(const nlohmann::json& j) {
  Plan p;
  p.x_opt = matrix_from_json(j.at("x_opt"), "x_opt");
  p.v_opt = matrix_from_json(j.at("v_opt"), "v_opt");
  p.goal = vector_from_json(j.at("goal"), "goal");
  p.converged = j.at("converged").get<bool>();
  p.final_cost = j.at("final_cost").get<double>();
  p.iterations = j.at("iterations").get<int>();
  p.kappa = j.at("kappa").get<double>();
  if (j.contains("per_particle_x")) {
    for (const auto& x : j.at("per_particle_x")) {
      p.per_particle_x.push_back(matrix_from_json(x, "per_particle_x"));
    }
  }
  if (p.x_opt.rows() != p.v_opt.rows() + 1) throw ConfigError("plan: x_opt must have T+1 rows");
  return p;
}

void save_plan(const Plan& plan, const std::string& path, const nlohmann::json& config_echo) {
  json j = plan_to_json(plan);
  j["git_describe"] = kGitDescribe;
  if (!config_echo.is_null() && !config_echo.empty()) j["config"] = config_echo;
  std::filesystem::create_directories(std::filesystem::path(path).parent_path().string().empty()
                                          ? "."
                                          : std::filesystem::path(path).parent_path().string());
  write_file(path, j.dump(2) + "\n");
}

Plan load_plan(const std::string& path) { return plan_from_json(load_json_file(path)); }

nlohmann::json gains_to_json(const GainSchedule& gains) {
  json j;
  j["layout"] = gains.layout == GainSchedule::Layout::kExpanded ? "expanded" : "plain";
  j["n_x"] = gains.n_x;
  j["n_z"] = gains.n_z;
  j["kappa_gain"] = gains.kappa_gain;
  json ks = json::array();
  for (const auto& k : gains.K_seq) ks.push_back(matrix_to_json(k));
  j["K"] = std::move(ks);
  return j;
}

GainSchedule gains_from_json(const nlohmann::json& j) {
  GainSchedule g;
  g.layout = j.at("layout").get<std::string>() == "expanded" ? GainSchedule::Layout::kExpanded
                                                             : GainSchedule::Layout::kPlain;
  g.n_x = j.at("n_x").get<int>();
  g.n_z = j.at("n_z").get<int>();
  g.kappa_gain = j.at("kappa_gain").get<double>();
  for (const auto& k : j.at("K")) g.K_seq.push_back(matrix_from_json(k, "K"));
  g.P_seq.assign(g.K_seq.size() + 1, Eigen::MatrixXd::Zero(g.n_state(), g.n_state()));
  return g;
}

void save_gains(const GainSchedule& gains, const std::string& path) {
  write_file(path, gains_to_json(gains).dump(2) + "\n");
}

GainSchedule load_gains(const std::string& path) { return gains_from_json(load_json_file(path)); }

ReferencePlan load_reference(const std::string& path) {
  const json j = load_json_file(path);
  ReferencePlan r;
  r.x_ref = matrix_from_json(j.at("x_ref"), "x_ref");
  r.v_ref = matrix_from_json(j.at("v_ref"), "v_ref");
  if (r.x_ref.rows() != r.v_ref.rows() + 1) {
    throw ConfigError("reference: x_ref must have one more row than v_ref");
  }
  return r;
}

void save_reference(const ReferencePlan& ref, const std::string& path) {
  json j;
  j["x_ref"] = matrix_to_json(ref.x_ref);
  j["v_ref"] = matrix_to_json(ref.v_ref);
  write_file(path, j.dump(2) + "\n");
}

}  // namespace csc
