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

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "csc/config.hpp"
#include "csc/linearize.hpp"
#include "csc/report.hpp"
#include "csc/rollout.hpp"
#include "csc/step.hpp"

namespace {

using namespace csc;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string controller;
  double kappa_plan = 0.0;
  double kappa_gain = 0.0;
  int threads = -1;
  bool seed_set = false;
  uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonFlags* f) {
  cmd->add_option("--config", f->config_path, "JSON run configuration");
  cmd->add_option("--out", f->out_dir, "output directory (overrides config)");
  cmd->add_option("--controller", f->controller, "open_loop | lqr | kp_lqr");
  cmd->add_option("--kappa-plan", f->kappa_plan, "planning smoothing");
  cmd->add_option("--kappa-gain", f->kappa_gain, "gain-synthesis smoothing");
  cmd->add_option("--threads", f->threads, "worker threads (0 = hardware)");
  cmd->add_option("--seed", f->seed, "base RNG seed")->each([f](const std::string&) {
    f->seed_set = true;
  });
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig cfg = f.config_path.empty() ? config_from_json(nlohmann::json::object())
                                        : load_config(f.config_path);
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  if (!f.controller.empty()) {
    if (f.controller != "open_loop" && f.controller != "lqr" && f.controller != "kp_lqr") {
      throw ConfigError("controller must be open_loop, lqr, or kp_lqr");
    }
    cfg.controller = f.controller;
  }
  if (f.kappa_plan != 0.0) {
    if (f.kappa_plan < 0.0) throw ConfigError("kappa must be > 0");
    cfg.kappa_plan = f.kappa_plan;
    cfg.optimizer.kappa = f.kappa_plan;
  }
  if (f.kappa_gain != 0.0) {
    if (f.kappa_gain < 0.0) throw ConfigError("kappa must be > 0");
    cfg.kappa_gain = f.kappa_gain;
  }
  if (f.seed_set) {
    cfg.seed = f.seed;
    cfg.perturbation.seed = f.seed;
  }
  if (f.threads >= 0) {
    cfg.threads = f.threads;
  } else if (cfg.threads == 0) {
    if (const char* env = std::getenv("CSC_THREADS")) cfg.threads = std::atoi(env);
  }
  return cfg;
}

struct Pipeline {
  RunConfig cfg;
  Scenario scenario;
  Eigen::VectorXd x0;
};

Pipeline make_pipeline(const CommonFlags& f) {
  Pipeline p{resolve_config(f), {}, {}};
  p.scenario = build_scenario(p.cfg.scenario_spec);
  p.x0 = seated_state(p.scenario, p.cfg.start_pose, p.cfg.goal_pose, p.cfg.clearance);
  return p;
}

PlantOptions plant_options(const Pipeline& p) {
  PlantOptions opts;
  opts.kind = PlantOptions::Kind::kExact;
  opts.substeps = p.cfg.substeps;
  opts.v_lo = p.scenario.v_lo;
  opts.v_hi = p.scenario.v_hi;
  return opts;
}

Plan run_plan(const Pipeline& p) {
  const RunConfig& cfg = p.cfg;
  ReferencePlan ref;
  if (!cfg.reference_file.empty()) {
    ref = load_reference(cfg.reference_file);
    if (ref.x_ref.cols() != p.scenario.scene.n_x()) {
      throw ConfigError("reference state width does not match the scenario");
    }
  } else {
    ref = generate_reference(p.scenario, p.x0, cfg.goal_pose, cfg.horizon, {cfg.press, cfg.seed});
  }

  TrajoptOptions opts = default_trajopt_options(p.scenario);
  opts.max_iters = cfg.optimizer.max_iters;
  opts.tol = cfg.optimizer.tol;
  opts.min_decrease = cfg.optimizer.min_decrease;
  opts.penalty_weight = cfg.optimizer.penalty_weight;
  opts.robust = cfg.optimizer.robust;
  opts.softmax_lambda = cfg.optimizer.softmax_lambda;
  opts.kappa = cfg.kappa_plan;
  opts.threads = cfg.threads;
  opts.seed = cfg.seed;

  if (!cfg.particles.empty()) {
    const auto parts =
        shape_particles(p.scenario, cfg.particles, cfg.start_pose, cfg.goal_pose, cfg.clearance);
    return mp_trajopt(scene_family(p.scenario), parts, ref, cfg.weights, opts);
  }
  ShapeParam sp;
  sp.p = Eigen::VectorXd::Constant(1, p.scenario.spec.object_radius);
  const Eigen::VectorXd x0 = p.x0;
  sp.x_init = [x0](const Eigen::VectorXd&) { return x0; };
  return sp_trajopt(p.scenario.scene, sp, ref, cfg.weights, opts);
}

GainSchedule run_gains(const Pipeline& p, const Plan& plan) {
  const RunConfig& cfg = p.cfg;
  if (cfg.controller == "open_loop") {
    GainSchedule g = zero_gains(plan.horizon(), p.scenario.n_a(), p.scenario.scene.n_x());
    g.kappa_gain = cfg.kappa_gain;
    return g;
  }
  if (cfg.controller == "kp_lqr") {
    const int T = plan.horizon();
    std::vector<Eigen::MatrixXd> A_seq(T), B_seq(T);
    for (int t = 0; t < T; ++t) {
      const Linearization lin = linearize(p.scenario.scene, p.scenario.scene.split(plan.x_opt.row(t)),
                                          plan.v_opt.row(t), cfg.kappa_gain);
      A_seq[t] = lin.A;
      B_seq[t] = lin.B;
    }
    const KeypointSet kps = rim_keypoints(p.scenario.spec.object_radius);
    const LqrWeights w =
        kp_lqr_default_weights(3, p.scenario.n_a(), kps.n_z(), cfg.kp_weight_order);
    GainSchedule g = kp_lqr(A_seq, B_seq, plan.x_opt.leftCols(3), kps, w);
    g.kappa_gain = cfg.kappa_gain;
    return g;
  }
  return gains_along_plan(p.scenario.scene, plan, cfg.lqr_weights, cfg.kappa_gain);
}

int cmd_plan(const CommonFlags& f) {
  const Pipeline p = make_pipeline(f);
  const Plan plan = run_plan(p);
  std::filesystem::create_directories(p.cfg.out_dir);
  save_plan(plan, p.cfg.out_dir + "/plan.json", p.cfg.echo);
  std::printf("plan: T=%d converged=%d final_cost=%.6g -> %s/plan.json\n", plan.horizon(),
              plan.converged ? 1 : 0, plan.final_cost, p.cfg.out_dir.c_str());
  return kExitOk;
}

Plan load_or_make_plan(const Pipeline& p, const std::string& plan_path) {
  const std::string path = plan_path.empty() ? p.cfg.out_dir + "/plan.json" : plan_path;
  if (std::filesystem::exists(path)) return load_plan(path);
  throw ConfigError("plan file '" + path + "' not found; run the plan verb first");
}

int cmd_gains(const CommonFlags& f, const std::string& plan_path) {
  const Pipeline p = make_pipeline(f);
  const Plan plan = load_or_make_plan(p, plan_path);
  const GainSchedule g = run_gains(p, plan);
  std::filesystem::create_directories(p.cfg.out_dir);
  save_gains(g, p.cfg.out_dir + "/gains.json");
  std::printf("gains: %s T=%d kappa=%.6g -> %s/gains.json\n", p.cfg.controller.c_str(),
              g.horizon(), g.kappa_gain, p.cfg.out_dir.c_str());
  return kExitOk;
}

int cmd_rollout(const CommonFlags& f, const std::string& plan_path, const std::string& gains_path) {
  const Pipeline p = make_pipeline(f);
  const Plan plan = load_or_make_plan(p, plan_path);
  GainSchedule g;
  if (p.cfg.controller == "open_loop") {
    g = zero_gains(plan.horizon(), p.scenario.n_a(), p.scenario.scene.n_x());
  } else {
    const std::string path = gains_path.empty() ? p.cfg.out_dir + "/gains.json" : gains_path;
    g = load_gains(path);
  }
  const KeypointSet kps = rim_keypoints(p.scenario.spec.object_radius);
  const FohController c = build_foh(plan, g, p.scenario.scene.h, &kps);
  const RolloutResult rr = closed_loop_rollout(p.scenario.scene, c, plan.x_opt.row(0),
                                               plant_options(p));
  if (!rr.success) {
    std::fprintf(stderr, "rollout failed at substep %d: %s\n", rr.fail_substep,
                 rr.fail_reason.c_str());
    return kExitNumeric;
  }
  const int n_u = p.scenario.n_u();
  const auto [pos, ang] = terminal_error(rr.terminal().head(n_u), plan.goal.head(n_u));
  std::filesystem::create_directories(p.cfg.out_dir);
  std::string csv = "step";
  for (int k = 0; k < p.scenario.scene.n_x(); ++k) csv += ",x" + std::to_string(k);
  csv += "\n";
  for (Eigen::Index r = 0; r < rr.x_traj.rows(); ++r) {
    csv += std::to_string(r);
    for (Eigen::Index cidx = 0; cidx < rr.x_traj.cols(); ++cidx) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), ",%.17g", rr.x_traj(r, cidx));
      csv += buf;
    }
    csv += "\n";
  }
  std::ofstream out(p.cfg.out_dir + "/rollout.csv", std::ios::binary);
  out << csv;
  std::printf("rollout: terminal pos_err=%.6g m ang_err=%.6g rad -> %s/rollout.csv\n", pos, ang,
              p.cfg.out_dir.c_str());
  return kExitOk;
}

int cmd_sweep(const CommonFlags& f, const std::string& plan_path, const std::string& gains_path,
              const std::string& baseline, const std::string& name_override) {
  const Pipeline p = make_pipeline(f);
  const Plan plan = load_or_make_plan(p, plan_path);
  GainSchedule g;
  const GainSchedule* gp = nullptr;
  if (p.cfg.controller != "open_loop") {
    const std::string path = gains_path.empty() ? p.cfg.out_dir + "/gains.json" : gains_path;
    g = load_gains(path);
    gp = &g;
  }
  const SweepReport rep =
      run_sweep(p.scenario, plan, gp, p.cfg.perturbation, plant_options(p), p.cfg.threads);
  const std::string name = name_override.empty() ? "sweep_" + p.cfg.controller : name_override;
  save_report(rep, p.cfg.out_dir, name, p.cfg.echo, baseline);
  std::printf("sweep: %d/%d ok, delta_pos=%.6g m delta_ang=%.6g rad -> %s/%s.csv\n",
              rep.success_count(), static_cast<int>(rep.records.size()), rep.delta_pos,
              rep.delta_ang, p.cfg.out_dir.c_str(), name.c_str());
  return kExitOk;
}

int cmd_kappa_study(const CommonFlags& f, const std::string& plan_path) {
  const Pipeline p = make_pipeline(f);
  const Plan plan = load_or_make_plan(p, plan_path);
  const auto results = kappa_study(p.scenario, plan, p.cfg.lqr_weights, p.cfg.kappa_list,
                                   p.cfg.perturbation, plant_options(p), p.cfg.threads);
  std::filesystem::create_directories(p.cfg.out_dir);
  nlohmann::json combined = nlohmann::json::array();
  for (const auto& [kappa, rep] : results) {
    char name[64];
    std::snprintf(name, sizeof(name), "sweep_kappa%g", kappa);
    save_report(rep, p.cfg.out_dir, name, p.cfg.echo);
    combined.push_back({{"kappa", kappa},
                        {"delta_pos_m", rep.delta_pos},
                        {"delta_ang_rad", rep.delta_ang},
                        {"ci95_pos_m", rep.ci95_pos},
                        {"ci95_ang_rad", rep.ci95_ang},
                        {"successes", rep.success_count()}});
    std::printf("kappa=%g: delta_pos=%.6g (±%.2g) m delta_ang=%.6g (±%.2g) rad [%d ok]\n", kappa,
                rep.delta_pos, rep.ci95_pos, rep.delta_ang, rep.ci95_ang, rep.success_count());
  }
  std::ofstream out(p.cfg.out_dir + "/kappa_study.json", std::ios::binary);
  out << combined.dump(2) << "\n";
  return kExitOk;
}

int cmd_demo_unilateral(const CommonFlags& f) {
  const RunConfig cfg = resolve_config(f);
  const double kappa = cfg.kappa_gain == 800.0 ? 160.0 : cfg.kappa_gain;
  const UnilateralReport rep = unilateral_demo(kappa);
  std::printf("1-D ball push, smoothing kappa = %g\n", rep.kappa);
  std::printf("%-6s %12s %12s %16s %14s\n", "case", "dx0 [m]", "dv0 [m]", "lin pred obj [m]",
              "exact obj [m]");
  auto row = [](const char* tag, const UnilateralCase& c) {
    std::printf("%-6s %12.5f %12.5f %16.6g %14.6g\n", tag, c.dx0, c.dv0, c.lin_pred_obj,
                c.exact_obj);
  };
  row("push", rep.push);
  row("pull", rep.pull);
  std::printf("push closes the goal gap: %.4f -> %.4f m; pull-case exact object motion = %g\n",
              rep.push.goal_dist_before, rep.push.goal_dist_after, rep.pull.exact_obj);
  std::filesystem::create_directories(cfg.out_dir);
  nlohmann::json j;
  for (const auto& [tag, c] : {std::pair<const char*, const UnilateralCase&>{"push", rep.push},
                               {"pull", rep.pull}}) {
    j[tag] = {{"dx0", c.dx0},
              {"dv0", c.dv0},
              {"lin_pred_obj", c.lin_pred_obj},
              {"exact_obj", c.exact_obj},
              {"goal_dist_before", c.goal_dist_before},
              {"goal_dist_after", c.goal_dist_after}};
  }
  j["kappa"] = rep.kappa;
  std::ofstream out(cfg.out_dir + "/unilateral.json", std::ios::binary);
  out << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_gradcheck(const CommonFlags& f, double kappa_flag, double fd_step) {
  const Pipeline p = make_pipeline(f);
  const double kappa = kappa_flag > 0.0 ? kappa_flag : p.cfg.kappa_gain;

  // Check at the seated start and at an engaged state a few reference steps in.
  const ReferencePlan ref =
      generate_reference(p.scenario, p.x0, p.cfg.goal_pose, p.cfg.horizon, {p.cfg.press});
  const Eigen::MatrixXd x_seq =
      rollout_open_loop(p.scenario.scene, p.x0, ref.v_ref.topRows(3), p.cfg.kappa_plan);

  double worst = 0.0;
  for (int i : {0, 3}) {
    const Configuration q = p.scenario.scene.split(x_seq.row(i));
    const Eigen::VectorXd u = i == 0 ? Eigen::VectorXd(x_seq.row(0).tail(p.scenario.n_a()))
                                     : Eigen::VectorXd(ref.v_ref.row(std::min<int>(i, ref.horizon() - 1)));
    const Linearization lin = linearize(p.scenario.scene, q, u, kappa);
    const auto [A_fd, B_fd] = finite_diff_linearize(p.scenario.scene, q, u, kappa, fd_step);
    const double scale_a = std::max(1.0, lin.A.cwiseAbs().maxCoeff());
    const double scale_b = std::max(1.0, lin.B.cwiseAbs().maxCoeff());
    const double ea = (lin.A - A_fd).cwiseAbs().maxCoeff() / scale_a;
    const double eb = (lin.B - B_fd).cwiseAbs().maxCoeff() / scale_b;
    std::printf("state %d: max rel err A=%.3g B=%.3g (cond ~ %.3g)\n", i, ea, eb,
                lin.cond_estimate);
    worst = std::max({worst, ea, eb});
  }
  std::printf("gradcheck: kappa=%g step=%g max rel err=%.3g\n", kappa, fd_step, worst);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contact-smoothed planning and linear-feedback stabilization toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string plan_path, gains_path, baseline, sweep_name;
  double kappa_flag = 0.0;
  double fd_step = 1e-6;

  auto* c_plan = app.add_subcommand("plan", "optimize a trajectory from a reference warm start");
  add_common(c_plan, &flags);

  auto* c_gains = app.add_subcommand("gains", "synthesize feedback gains along a plan");
  add_common(c_gains, &flags);
  c_gains->add_option("--plan", plan_path, "plan JSON (default <out>/plan.json)");

  auto* c_roll = app.add_subcommand("rollout", "single closed-loop rollout against the plant");
  add_common(c_roll, &flags);
  c_roll->add_option("--plan", plan_path, "plan JSON");
  c_roll->add_option("--gains", gains_path, "gain schedule JSON");

  auto* c_sweep = app.add_subcommand("sweep", "perturbation sweep with terminal-error report");
  add_common(c_sweep, &flags);
  c_sweep->add_option("--plan", plan_path, "plan JSON");
  c_sweep->add_option("--gains", gains_path, "gain schedule JSON");
  c_sweep->add_option("--baseline", baseline, "summary JSON to pair against (emits eta)");
  c_sweep->add_option("--name", sweep_name, "report base name");

  auto* c_kappa = app.add_subcommand("kappa-study", "sweep per gain-smoothing value");
  add_common(c_kappa, &flags);
  c_kappa->add_option("--plan", plan_path, "plan JSON");

  auto* c_demo = app.add_subcommand("demo-unilateral", "1-D push/pull analysis table");
  add_common(c_demo, &flags);

  auto* c_grad = app.add_subcommand("gradcheck", "linearization vs finite differences");
  add_common(c_grad, &flags);
  c_grad->add_option("--kappa", kappa_flag, "smoothing for the check");
  c_grad->add_option("--step", fd_step, "finite-difference step");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_plan->parsed()) return cmd_plan(flags);
    if (c_gains->parsed()) return cmd_gains(flags, plan_path);
    if (c_roll->parsed()) return cmd_rollout(flags, plan_path, gains_path);
    if (c_sweep->parsed()) return cmd_sweep(flags, plan_path, gains_path, baseline, sweep_name);
    if (c_kappa->parsed()) return cmd_kappa_study(flags, plan_path);
    if (c_demo->parsed()) return cmd_demo_unilateral(flags);
    if (c_grad->parsed()) return cmd_gradcheck(flags, kappa_flag, fd_step);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitOk;
}
