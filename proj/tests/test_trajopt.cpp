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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "csc/rollout.hpp"
#include "csc/scenarios.hpp"
#include "csc/step.hpp"
#include "csc/trajopt.hpp"
#include "oracles.hpp"

using namespace csc;

namespace {

ShapeParam fixed_start(const Eigen::VectorXd& x0, double radius) {
  ShapeParam p;
  p.p = Eigen::VectorXd::Constant(1, radius);
  p.x_init = [x0](const Eigen::VectorXd&) { return x0; };
  return p;
}

ReferencePlan constant_reference(const Eigen::VectorXd& x0, int T) {
  ReferencePlan ref;
  ref.x_ref = x0.transpose().replicate(T + 1, 1);
  const int n_a = 1;
  ref.v_ref = Eigen::MatrixXd::Zero(T, n_a);
  return ref;
}

}  // namespace

TEST_CASE("rollout with empty input sequence returns the start") {
  const Scenario s = build_ball1d();
  const Eigen::MatrixXd x =
      rollout_open_loop(s.scene, s.x_init, Eigen::MatrixXd::Zero(0, 1), 1e5);
  CHECK(x.rows() == 1);
  CHECK((x.row(0).transpose() - s.x_init).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("no-contact servo reaches the constant command and stays") {
  Scenario s = build_ball1d();
  SceneModel sc = s.scene;
  sc.pairs.clear();
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(5, 1, 0.37);
  const Eigen::MatrixXd x = rollout_open_loop(sc, s.x_init, v, 1e5);
  for (int t = 1; t <= 5; ++t) CHECK(x(t, 1) == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(x(5, 0) == doctest::Approx(s.x_init[0]).epsilon(1e-12));
}

TEST_CASE("five-step rollout matches chained brute-force solves") {
  const Scenario s = build_ball1d();
  const double kappa = 200.0;
  Eigen::MatrixXd v(5, 1);
  v << 0.12, 0.16, 0.2, 0.24, 0.28;
  const Eigen::MatrixXd x = rollout_open_loop(s.scene, s.x_init, v, kappa);
  Eigen::VectorXd xt = s.x_init;
  for (int t = 0; t < 5; ++t) {
    const QpData qp =
        assemble_qp(s.scene, s.scene.split(xt), v.row(t), contact_kernel(s.scene, s.scene.split(xt)));
    const Eigen::VectorXd dq = oracles::grid_minimize_2d(qp, kappa, 0.5);
    xt += dq;
    CHECK((x.row(t + 1).transpose() - xt).cwiseAbs().maxCoeff() < 2e-6);
    xt = x.row(t + 1);  // resync so grid error does not accumulate
  }
}

TEST_CASE("traj_cost is zero on a goal-pinned trajectory") {
  const CostWeights w = default_cost_weights(1, 1);
  Eigen::VectorXd goal(2);
  goal << 0.4, 0.3;
  const Eigen::MatrixXd x = goal.transpose().replicate(6, 1);
  const Eigen::MatrixXd v = Eigen::MatrixXd::Zero(5, 1);
  CHECK(traj_cost(x, v, w, goal) == 0.0);
}

TEST_CASE("traj_cost weights a single deviation quadratically") {
  CostWeights w = default_cost_weights(1, 1);
  Eigen::VectorXd goal = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(6, 2);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(5, 1);
  x(2, 0) = 0.3;  // one running deviation in the object coordinate (weight 10)
  CHECK(traj_cost(x, v, w, goal) == doctest::Approx(10.0 * 0.09).epsilon(1e-12));
  x.setZero();
  x(5, 0) = 0.2;  // terminal deviation (weight 1000)
  CHECK(traj_cost(x, v, w, goal) == doctest::Approx(1000.0 * 0.04).epsilon(1e-12));
  x.setZero();
  v(3, 0) = 0.5;  // input cost (weight 5)
  CHECK(traj_cost(x, v, w, goal) == doctest::Approx(5.0 * 0.25).epsilon(1e-12));
}

TEST_CASE("cost gradient vanishes at an unconstrained optimum") {
  Scenario s = build_ball1d();
  SceneModel sc = s.scene;
  sc.pairs.clear();
  CostWeights w = default_cost_weights(1, 1);
  w.R_t.setZero();  // pure tracking
  Eigen::VectorXd goal = s.x_init;
  const Eigen::MatrixXd v = Eigen::MatrixXd::Constant(4, 1, s.x_init[1]);
  const Eigen::MatrixXd g = traj_cost_gradient(sc, s.x_init, v, w, goal, 1e5);
  CHECK(g.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("cost gradient matches finite differences through contact") {
  const Scenario s = build_planar_push('a');
  Eigen::VectorXd goal_pose(3);
  goal_pose << 0.2, 0.05, 0.2;
  const ReferencePlan ref = generate_reference(s, s.x_init, goal_pose, 4);
  const CostWeights w = default_cost_weights(3, 4);
  const Eigen::VectorXd goal = ref.goal();
  const double kappa = 1e4;

  const Eigen::MatrixXd g =
      traj_cost_gradient(s.scene, s.x_init, ref.v_ref, w, goal, kappa);
  Eigen::MatrixXd g_fd(ref.v_ref.rows(), ref.v_ref.cols());
  const double step = 1e-6;
  for (int t = 0; t < ref.v_ref.rows(); ++t) {
    for (int j = 0; j < ref.v_ref.cols(); ++j) {
      Eigen::MatrixXd vp = ref.v_ref, vm = ref.v_ref;
      vp(t, j) += step;
      vm(t, j) -= step;
      const double cp = traj_cost(rollout_open_loop(s.scene, s.x_init, vp, kappa), vp, w, goal);
      const double cm = traj_cost(rollout_open_loop(s.scene, s.x_init, vm, kappa), vm, w, goal);
      g_fd(t, j) = (cp - cm) / (2.0 * step);
    }
  }
  const double scale = std::max(1.0, g_fd.cwiseAbs().maxCoeff());
  CHECK((g - g_fd).cwiseAbs().maxCoeff() / scale < 1e-4);
}

TEST_CASE("doubling R doubles the input gradient term") {
  Scenario s = build_ball1d();
  SceneModel sc = s.scene;
  sc.pairs.clear();
  CostWeights w = default_cost_weights(1, 1);
  w.Q_t.setZero();
  w.Q_T.setZero();
  Eigen::MatrixXd v(3, 1);
  v << 0.1, -0.2, 0.3;
  const Eigen::MatrixXd g1 = traj_cost_gradient(sc, s.x_init, v, w, s.x_init, 1e5);
  w.R_t *= 2.0;
  const Eigen::MatrixXd g2 = traj_cost_gradient(sc, s.x_init, v, w, s.x_init, 1e5);
  CHECK((g2 - 2.0 * g1).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("already-optimal reference is returned unchanged") {
  Scenario s = build_ball1d();
  SceneModel sc = s.scene;
  sc.pairs.clear();
  Eigen::VectorXd x0(2);
  x0 << 0.5, 0.0;
  const ReferencePlan ref = constant_reference(x0, 6);
  TrajoptOptions opts;
  opts.kappa = 1e5;
  const Plan plan = sp_trajopt(sc, fixed_start(x0, 0.1), ref, default_cost_weights(1, 1), opts);
  CHECK(plan.converged);
  CHECK(plan.iterations == 0);
  CHECK((plan.v_opt - ref.v_ref).cwiseAbs().maxCoeff() == 0.0);
  CHECK(plan.final_cost == doctest::Approx(0.0));
}

TEST_CASE("1-D push: optimization beats the straight-line warm start") {
  const Scenario s = build_ball1d();
  Eigen::VectorXd goal(1);
  goal << s.x_init[0] + 0.2;
  const ReferencePlan ref = generate_reference(s, s.x_init, goal, 10);
  TrajoptOptions opts = default_trajopt_options(s);
  opts.max_iters = 200;

  const Eigen::MatrixXd warm = rollout_open_loop(s.scene, s.x_init, ref.v_ref, opts.kappa);
  const double warm_err = std::abs(warm(10, 0) - goal[0]);

  const Plan plan =
      sp_trajopt(s.scene, fixed_start(s.x_init, 0.1), ref, default_cost_weights(1, 1), opts);
  const double opt_err = std::abs(plan.x_opt(10, 0) - goal[0]);
  CHECK(opt_err < warm_err);
  CHECK(plan.final_cost <= plan.cost_history.front());
}

TEST_CASE("descent: accepted iterates never increase the objective") {
  const Scenario s = build_ball1d();
  Eigen::VectorXd goal(1);
  goal << 0.45;
  const ReferencePlan ref = generate_reference(s, s.x_init, goal, 8);
  TrajoptOptions opts = default_trajopt_options(s);
  opts.max_iters = 60;
  const Plan plan =
      sp_trajopt(s.scene, fixed_start(s.x_init, 0.1), ref, default_cost_weights(1, 1), opts);
  for (size_t i = 1; i < plan.cost_history.size(); ++i) {
    CHECK(plan.cost_history[i] <= plan.cost_history[i - 1]);
  }
}

TEST_CASE("shooting consistency: x_opt reproduces from v_opt") {
  const Scenario s = build_ball1d();
  Eigen::VectorXd goal(1);
  goal << 0.42;
  const ReferencePlan ref = generate_reference(s, s.x_init, goal, 6);
  TrajoptOptions opts = default_trajopt_options(s);
  opts.max_iters = 40;
  const Plan plan =
      sp_trajopt(s.scene, fixed_start(s.x_init, 0.1), ref, default_cost_weights(1, 1), opts);
  const Eigen::MatrixXd re = rollout_open_loop(s.scene, plan.x_opt.row(0), plan.v_opt, opts.kappa);
  CHECK((re - plan.x_opt).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("box-bound penalties keep converged plans feasible") {
  const Scenario s = build_ball1d();
  Eigen::VectorXd goal(1);
  goal << 0.5;
  const ReferencePlan ref = generate_reference(s, s.x_init, goal, 8);
  TrajoptOptions opts = default_trajopt_options(s);
  const Plan plan =
      sp_trajopt(s.scene, fixed_start(s.x_init, 0.1), ref, default_cost_weights(1, 1), opts);
  REQUIRE(plan.converged);
  const double width = (s.v_hi - s.v_lo).maxCoeff();
  for (int t = 0; t < plan.horizon(); ++t) {
    for (int j = 0; j < plan.v_opt.cols(); ++j) {
      CHECK(plan.v_opt(t, j) >= s.v_lo[j] - 1e-6 * width);
      CHECK(plan.v_opt(t, j) <= s.v_hi[j] + 1e-6 * width);
    }
  }
}

TEST_CASE("mp_trajopt with one particle is bitwise-identical to sp_trajopt") {
  const Scenario s = build_planar_push('a');
  Eigen::VectorXd goal_pose(3);
  goal_pose << 0.22, 0.03, 0.1;
  const ReferencePlan ref = generate_reference(s, s.x_init, goal_pose, 6);
  TrajoptOptions opts = default_trajopt_options(s);
  opts.max_iters = 8;

  ShapeParam p = fixed_start(s.x_init, s.spec.object_radius);
  const Plan sp = sp_trajopt(s.scene, p, ref, default_cost_weights(3, 4), opts);

  SceneFamily family = [&s](const ShapeParam& q) {
    return std::make_pair(s.scene, q.x_init(q.p));
  };
  const Plan mp = mp_trajopt(family, {p}, ref, default_cost_weights(3, 4), opts);

  CHECK((sp.v_opt - mp.v_opt).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sp.x_opt - mp.x_opt).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sp.final_cost == mp.final_cost);
  CHECK(sp.iterations == mp.iterations);
}

TEST_CASE("duplicated particles behave like a single one") {
  const Scenario s = build_planar_push('a');
  Eigen::VectorXd goal_pose(3);
  goal_pose << 0.2, 0.0, 0.0;
  const ReferencePlan ref = generate_reference(s, s.x_init, goal_pose, 5);
  TrajoptOptions opts = default_trajopt_options(s);
  opts.max_iters = 6;

  ShapeParam p = fixed_start(s.x_init, s.spec.object_radius);
  SceneFamily family = [&s](const ShapeParam& q) {
    return std::make_pair(s.scene, q.x_init(q.p));
  };
  const Plan one = mp_trajopt(family, {p}, ref, default_cost_weights(3, 4), opts);
  const Plan three = mp_trajopt(family, {p, p, p}, ref, default_cost_weights(3, 4), opts);
  CHECK((one.v_opt - three.v_opt).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(three.per_particle_x.size() == 3);
  CHECK((three.per_particle_x[0] - three.per_particle_x[2]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("softmax robust cost") {
  CHECK(softmax_robust_cost({3.7, 3.7, 3.7}, 5.0) == doctest::Approx(3.7).epsilon(1e-12));
  const double v = softmax_robust_cost({0.0, 1.0}, 20.0);
  CHECK(std::abs(v - 1.0) < 0.05);
  CHECK(v == doctest::Approx(0.96534).epsilon(1e-3));
  // lambda -> 0 recovers the mean.
  CHECK(softmax_robust_cost({0.2, 0.8}, 1e-6) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_THROWS_AS(softmax_robust_cost({}, 1.0), ConfigError);

  // Monotone in each entry and bounded by [mean, max].
  const double base = softmax_robust_cost({0.1, 0.5, 0.9}, 3.0);
  CHECK(softmax_robust_cost({0.1, 0.6, 0.9}, 3.0) > base);
  CHECK(base >= (0.1 + 0.5 + 0.9) / 3.0);
  CHECK(base <= 0.9);
}

TEST_CASE("softmax aggregation is a usable robust objective") {
  const Scenario s = build_planar_push('a');
  Eigen::VectorXd goal_pose(3);
  goal_pose << 0.2, 0.0, 0.1;
  const Eigen::Vector3d start(0, 0, 0);
  const Eigen::VectorXd x0 = seated_state(s, start, goal_pose, 0.045);
  const ReferencePlan ref = generate_reference(s, x0, goal_pose, 5);
  TrajoptOptions opts = default_trajopt_options(s);
  opts.max_iters = 10;
  opts.robust = TrajoptOptions::Robust::kSoftmax;
  opts.softmax_lambda = 5.0;
  const auto particles = shape_particles(s, "abc", start, goal_pose, 0.045);
  const Plan plan = mp_trajopt(scene_family(s), particles, ref, default_cost_weights(3, 4), opts);
  CHECK(plan.final_cost <= plan.cost_history.front());
  CHECK(plan.per_particle_x.size() == 3);
}

TEST_CASE("generate_reference endpoints and bounds") {
  const Scenario s = build_planar_push('a');
  Eigen::VectorXd goal_pose(3);
  goal_pose << 0.3, -0.1, 0.4;
  const ReferencePlan ref = generate_reference(s, s.x_init, goal_pose, 12);
  CHECK((ref.x_ref.row(0).transpose() - s.x_init).cwiseAbs().maxCoeff() == 0.0);
  CHECK((ref.x_ref.row(12).head(3).transpose() - goal_pose).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(ref.horizon() == 12);

  CHECK_THROWS_AS(generate_reference(s, s.x_init, goal_pose, 3), ConfigError);
  CHECK_NOTHROW(generate_reference(s, s.x_init, goal_pose, 4));
  Eigen::VectorXd far = goal_pose;
  far[0] = 5.0;
  CHECK_THROWS_AS(generate_reference(s, s.x_init, far, 12), ConfigError);

  // goal == start produces a constant object reference.
  Eigen::VectorXd start_pose = s.x_init.head(3);
  const ReferencePlan still = generate_reference(s, s.x_init, start_pose, 6);
  for (int t = 1; t <= 6; ++t) {
    CHECK((still.x_ref.row(t).head(3) - still.x_ref.row(1).head(3)).cwiseAbs().maxCoeff() <
          1e-12);
  }
}
