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

#include "csc/linearize.hpp"
#include "csc/scenarios.hpp"
#include "csc/trajopt.hpp"

using namespace csc;

namespace {

double rel_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  return (got - want).cwiseAbs().maxCoeff() / std::max(1.0, want.cwiseAbs().maxCoeff());
}

// An engaged planar state: run a few steps of the stock reference.
std::pair<Eigen::VectorXd, Eigen::VectorXd> engaged_planar_state(const Scenario& s) {
  Eigen::VectorXd goal(3);
  goal << 0.25, 0.05, 0.2;
  const ReferencePlan ref = generate_reference(s, s.x_init, goal, 16);
  const Eigen::MatrixXd x_seq = rollout_open_loop(s.scene, s.x_init, ref.v_ref.topRows(4), 1e5);
  return {x_seq.row(4), ref.v_ref.row(4)};
}

}  // namespace

TEST_CASE("no contact: A and B take the servo form") {
  Scenario s = build_planar_push('a');
  SceneModel sc = s.scene;
  sc.pairs.clear();
  const Eigen::VectorXd x = s.x_init;
  const Eigen::VectorXd u = x.tail(4);
  const Linearization lin = linearize(sc, sc.split(x), u, 1e5);

  Eigen::MatrixXd A_want = Eigen::MatrixXd::Zero(7, 7);
  A_want.topLeftCorner(3, 3).setIdentity();
  Eigen::MatrixXd B_want = Eigen::MatrixXd::Zero(7, 4);
  B_want.bottomRows(4).setIdentity();
  CHECK((lin.A - A_want).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((lin.B - B_want).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_FALSE(lin.cond_warning);
}

TEST_CASE("linearization matches central differences on the planar scenario") {
  const Scenario s = build_planar_push('a');
  const auto [x, u] = engaged_planar_state(s);
  for (double kappa : {160.0, 800.0}) {
    const Linearization lin = linearize(s.scene, s.scene.split(x), u, kappa);
    const auto [A_fd, B_fd] = finite_diff_linearize(s.scene, s.scene.split(x), u, kappa, 1e-6);
    CHECK(rel_err(lin.A, A_fd) <= 1e-4);
    CHECK(rel_err(lin.B, B_fd) <= 1e-4);
  }
}

TEST_CASE("linearization matches central differences on the 1-D scenario") {
  const Scenario s = build_ball1d();
  Eigen::VectorXd x(2), u(1);
  x << 0.2, 0.05;
  u << 0.13;
  for (double kappa : {160.0, 800.0}) {
    const Linearization lin = linearize(s.scene, s.scene.split(x), u, kappa);
    const auto [A_fd, B_fd] = finite_diff_linearize(s.scene, s.scene.split(x), u, kappa, 1e-6);
    CHECK(rel_err(lin.A, A_fd) <= 1e-4);
    CHECK(rel_err(lin.B, B_fd) <= 1e-4);
  }
}

TEST_CASE("far contact at weak smoothing reduces to the no-contact form") {
  const Scenario s = build_ball1d();
  Eigen::VectorXd x(2), u(1);
  x << 1.5, 0.0;  // gap 1.4 m, far beyond the barrier length scale
  u << 0.0;
  const Linearization lin = linearize(s.scene, s.scene.split(x), u, 1e5);
  Eigen::MatrixXd A_nc = Eigen::MatrixXd::Zero(2, 2);
  A_nc(0, 0) = 1.0;
  Eigen::MatrixXd B_nc = Eigen::MatrixXd::Zero(2, 1);
  B_nc(1, 0) = 1.0;
  CHECK((lin.A - A_nc).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((lin.B - B_nc).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("finite differences recover a linear mock exactly") {
  // f(x, u) = A x + B u realized by a contact-free scene with tau = 0: the
  // object block is the identity map and the robot block reaches u.
  Scenario s = build_ball1d();
  SceneModel sc = s.scene;
  sc.pairs.clear();
  Eigen::VectorXd x(2), u(1);
  x << 0.4, -0.2;
  u << 0.3;
  const auto [A_fd, B_fd] = finite_diff_linearize(sc, sc.split(x), u, 1e5, 1e-6);
  Eigen::MatrixXd A_want(2, 2), B_want(2, 1);
  A_want << 1, 0, 0, 0;
  B_want << 0, 1;
  CHECK((A_fd - A_want).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((B_fd - B_want).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("zero finite-difference step is rejected") {
  const Scenario s = build_ball1d();
  CHECK_THROWS_AS(
      finite_diff_linearize(s.scene, s.scene.split(s.x_init), Eigen::VectorXd::Zero(1), 800.0, 0.0),
      ConfigError);
}

TEST_CASE("ill-conditioned Hessian attaches a warning") {
  Scenario s = build_ball1d();
  SceneModel sc = s.scene;
  sc.pairs.clear();
  sc.K_a[0] = 1e-13;  // robot block curvature collapses
  Eigen::VectorXd x(2), u(1);
  x << 0.5, 0.0;
  u << 0.0;
  const Linearization lin = linearize(sc, sc.split(x), u, 1e5);
  CHECK(lin.cond_warning);
  CHECK(lin.A.allFinite());
}

TEST_CASE("every preset passes the gradient check at kappa=800 out of the box") {
  for (const auto& name : preset_names()) {
    const Scenario s = build_preset(name);
    const Eigen::VectorXd x = s.x_init;
    const Eigen::VectorXd u = x.tail(s.n_a());
    const Linearization lin = linearize(s.scene, s.scene.split(x), u, 800.0);
    const auto [A_fd, B_fd] = finite_diff_linearize(s.scene, s.scene.split(x), u, 800.0, 1e-6);
    CHECK(rel_err(lin.A, A_fd) <= 1e-4);
    CHECK(rel_err(lin.B, B_fd) <= 1e-4);
  }
}
