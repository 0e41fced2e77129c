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

#include "csc/trajopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csc/linearize.hpp"
#include "csc/parallel.hpp"
#include "csc/step.hpp"

namespace csc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double hinge(double v) { return v > 0.0 ? v : 0.0; }

// Quadratic-hinge penalty on a box; gradient accumulated into g when given.
double box_penalty(const Eigen::VectorXd& v, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                   double weight, Eigen::VectorXd* g) {
  if (lo.size() == 0 && hi.size() == 0) return 0.0;
  double pen = 0.0;
  for (int k = 0; k < v.size(); ++k) {
    if (lo.size() > 0) {
      const double d = hinge(lo[k] - v[k]);
      pen += weight * d * d;
      if (g && d > 0.0) (*g)[k] -= 2.0 * weight * d;
    }
    if (hi.size() > 0) {
      const double d = hinge(v[k] - hi[k]);
      pen += weight * d * d;
      if (g && d > 0.0) (*g)[k] += 2.0 * weight * d;
    }
  }
  return pen;
}

// Finger-finger overlap hinge at one state.
double collision_penalty(const SceneModel& scene, const std::vector<std::pair<int, int>>& pairs,
                         const Eigen::VectorXd& x, double weight, Eigen::VectorXd* g) {
  double pen = 0.0;
  for (const auto& [ia, ib] : pairs) {
    const Body& a = scene.bodies[static_cast<size_t>(ia)];
    const Body& b = scene.bodies[static_cast<size_t>(ib)];
    const int a0 = scene.coord_index(a, 0);
    const int b0 = scene.coord_index(b, 0);
    const Eigen::Vector2d ca(x[a0], x[a0 + 1]);
    const Eigen::Vector2d cb(x[b0], x[b0 + 1]);
    const double len = (ca - cb).norm();
    const double overlap = hinge(a.radius + b.radius - len);
    if (overlap <= 0.0 || len < 1e-12) continue;
    pen += weight * overlap * overlap;
    if (g) {
      const Eigen::Vector2d dir = (ca - cb) / len;
      const double coeff = -2.0 * weight * overlap;  // d(overlap)/dlen = -1
      (*g)[a0] += coeff * dir.x();
      (*g)[a0 + 1] += coeff * dir.y();
      (*g)[b0] -= coeff * dir.x();
      (*g)[b0 + 1] -= coeff * dir.y();
    }
  }
  return pen;
}

struct StagePenalty {
  const SceneModel* scene = nullptr;
  const TrajoptOptions* opts = nullptr;

  double state_value(const Eigen::VectorXd& x, Eigen::VectorXd* g) const {
    if (!opts) return 0.0;
    double pen = box_penalty(x, opts->x_lo, opts->x_hi, opts->penalty_weight, g);
    pen += collision_penalty(*scene, opts->noncollide_bodies, x, opts->penalty_weight, g);
    return pen;
  }
};

}  // namespace

Eigen::MatrixXd rollout_open_loop(const SceneModel& scene, const Eigen::VectorXd& x0,
                                  const Eigen::MatrixXd& v_seq, double kappa) {
  const int T = static_cast<int>(v_seq.rows());
  if (x0.size() != scene.n_x()) throw ConfigError("x0 size does not match scene");
  if (T > 0 && v_seq.cols() != scene.n_a()) throw ConfigError("v_seq width must be n_a");

  Eigen::MatrixXd x(T + 1, scene.n_x());
  x.row(0) = x0;
  for (int t = 0; t < T; ++t) {
    try {
      const StepResult r = smoothed_step(scene, scene.split(x.row(t)), v_seq.row(t), kappa);
      x.row(t + 1) = r.q_next.x();
    } catch (const NumericError& e) {
      throw NumericError("rollout failed at step " + std::to_string(t) + ": " + e.what(),
                         e.residual());
    }
  }
  return x;
}

double traj_cost(const Eigen::MatrixXd& x_seq, const Eigen::MatrixXd& v_seq,
                 const CostWeights& weights, const Eigen::VectorXd& goal) {
  const int T = static_cast<int>(v_seq.rows());
  if (x_seq.rows() != T + 1) throw ConfigError("x_seq must have T+1 rows");
  if (x_seq.cols() != goal.size()) throw ConfigError("goal size must match state width");

  double cost = 0.0;
  for (int t = 1; t < T; ++t) {
    const Eigen::VectorXd e = x_seq.row(t).transpose() - goal;
    cost += e.dot(weights.Q_t * e);
  }
  if (T >= 1) {
    const Eigen::VectorXd e = x_seq.row(T).transpose() - goal;
    cost += e.dot(weights.Q_T * e);
  }
  for (int t = 0; t < T; ++t) {
    const Eigen::VectorXd v = v_seq.row(t);
    cost += v.dot(weights.R_t * v);
  }
  return cost;
}

namespace {

// Reverse accumulation of d/dv [ tracking cost + optional stage penalties ].
Eigen::MatrixXd adjoint_gradient(const SceneModel& scene, const Eigen::MatrixXd& x_seq,
                                 const Eigen::MatrixXd& v_seq, const CostWeights& weights,
                                 const Eigen::VectorXd& goal, double kappa,
                                 const StagePenalty* pen) {
  const int T = static_cast<int>(v_seq.rows());
  const int nx = scene.n_x();
  const int na = scene.n_a();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(T, na);
  if (T == 0) return g;

  auto stage_grad = [&](int t) {
    Eigen::VectorXd gx = Eigen::VectorXd::Zero(nx);
    const Eigen::VectorXd e = x_seq.row(t).transpose() - goal;
    if (t == T) {
      gx = 2.0 * (weights.Q_T * e);
    } else if (t >= 1) {
      gx = 2.0 * (weights.Q_t * e);
    }
    if (pen && t >= 1) pen->state_value(x_seq.row(t), &gx);
    return gx;
  };

  Eigen::VectorXd lambda = stage_grad(T);
  for (int t = T - 1; t >= 0; --t) {
    const Linearization lin = linearize(scene, scene.split(x_seq.row(t)), v_seq.row(t), kappa);
    g.row(t) = (2.0 * (weights.R_t * v_seq.row(t).transpose()) + lin.B.transpose() * lambda)
                   .transpose();
    if (t > 0) lambda = stage_grad(t) + lin.A.transpose() * lambda;
  }
  return g;
}

}  // namespace

Eigen::MatrixXd traj_cost_gradient(const SceneModel& scene, const Eigen::VectorXd& x0,
                                   const Eigen::MatrixXd& v_seq, const CostWeights& weights,
                                   const Eigen::VectorXd& goal, double kappa) {
  const Eigen::MatrixXd x_seq = rollout_open_loop(scene, x0, v_seq, kappa);
  return adjoint_gradient(scene, x_seq, v_seq, weights, goal, kappa, nullptr);
}

double softmax_robust_cost(const std::vector<double>& costs, double lambda) {
  if (costs.empty()) throw ConfigError("softmax_robust_cost needs at least one cost");
  if (lambda <= 0.0) throw ConfigError("softmax lambda must be > 0");
  const double m = *std::max_element(costs.begin(), costs.end());
  double acc = 0.0;
  for (double c : costs) acc += std::exp(lambda * (c - m));
  return m + std::log(acc / static_cast<double>(costs.size())) / lambda;
}

namespace {

struct ParticleProblem {
  SceneModel scene;
  Eigen::VectorXd x0;
};

struct Evaluation {
  bool ok = false;
  double objective = kInf;
  std::vector<double> particle_costs;      // tracking + state penalties
  std::vector<Eigen::MatrixXd> rollouts;   // per particle
};

class AverageProblem {
 public:
  AverageProblem(std::vector<ParticleProblem> particles, const ReferencePlan& ref,
                 const CostWeights& weights, const TrajoptOptions& opts)
      : particles_(std::move(particles)), weights_(weights), opts_(opts), goal_(ref.goal()) {}

  Evaluation evaluate(const Eigen::MatrixXd& v) const {
    const int n = static_cast<int>(particles_.size());
    Evaluation ev;
    ev.particle_costs.assign(static_cast<size_t>(n), 0.0);
    ev.rollouts.assign(static_cast<size_t>(n), {});
    std::vector<bool> ok(static_cast<size_t>(n), false);
    parallel_for(n, opts_.threads, [&](int i) {
      const auto& p = particles_[static_cast<size_t>(i)];
      Eigen::MatrixXd x;
      try {
        x = rollout_open_loop(p.scene, p.x0, v, opts_.kappa);
      } catch (const NumericError&) {
        return;  // particle marked failed
      }
      StagePenalty pen{&p.scene, &opts_};
      double c = traj_cost(x, Eigen::MatrixXd::Zero(v.rows(), v.cols()), weights_, goal_);
      for (int t = 1; t <= static_cast<int>(v.rows()); ++t) {
        c += pen.state_value(x.row(t), nullptr);
      }
      ev.rollouts[static_cast<size_t>(i)] = std::move(x);
      ev.particle_costs[static_cast<size_t>(i)] = c;
      ok[static_cast<size_t>(i)] = true;
    });
    for (bool o : ok) {
      if (!o) return ev;  // ok stays false
    }
    double agg;
    if (opts_.robust == TrajoptOptions::Robust::kSoftmax) {
      agg = softmax_robust_cost(ev.particle_costs, opts_.softmax_lambda);
    } else {
      double s = 0.0;
      for (double c : ev.particle_costs) s += c;
      agg = s / static_cast<double>(n);
    }
    ev.objective = agg + input_cost(v);
    ev.ok = true;
    return ev;
  }

  Eigen::MatrixXd gradient(const Eigen::MatrixXd& v, const Evaluation& ev) const {
    const int n = static_cast<int>(particles_.size());
    std::vector<Eigen::MatrixXd> grads(static_cast<size_t>(n));
    parallel_for(n, opts_.threads, [&](int i) {
      const auto& p = particles_[static_cast<size_t>(i)];
      StagePenalty pen{&p.scene, &opts_};
      CostWeights track_only = weights_;
      track_only.R_t = Eigen::MatrixXd::Zero(v.cols(), v.cols());
      grads[static_cast<size_t>(i)] = adjoint_gradient(
          p.scene, ev.rollouts[static_cast<size_t>(i)], v, track_only, goal_, opts_.kappa, &pen);
    });
    std::vector<double> w(static_cast<size_t>(n), 1.0 / static_cast<double>(n));
    if (opts_.robust == TrajoptOptions::Robust::kSoftmax) {
      const double m =
          *std::max_element(ev.particle_costs.begin(), ev.particle_costs.end());
      double z = 0.0;
      for (double c : ev.particle_costs) z += std::exp(opts_.softmax_lambda * (c - m));
      for (size_t i = 0; i < w.size(); ++i) {
        w[i] = std::exp(opts_.softmax_lambda * (ev.particle_costs[i] - m)) / z;
      }
    }
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(v.rows(), v.cols());
    for (int i = 0; i < n; ++i) g += w[static_cast<size_t>(i)] * grads[static_cast<size_t>(i)];

    // Shared input terms: quadratic cost plus command-box penalty.
    for (int t = 0; t < v.rows(); ++t) {
      Eigen::VectorXd gv = 2.0 * (weights_.R_t * v.row(t).transpose());
      box_penalty(v.row(t), opts_.v_lo, opts_.v_hi, opts_.penalty_weight, &gv);
      g.row(t) += gv.transpose();
    }
    return g;
  }

  const std::vector<ParticleProblem>& particles() const { return particles_; }

 private:
  double input_cost(const Eigen::MatrixXd& v) const {
    double c = 0.0;
    for (int t = 0; t < v.rows(); ++t) {
      const Eigen::VectorXd vt = v.row(t);
      c += vt.dot(weights_.R_t * vt);
      c += box_penalty(vt, opts_.v_lo, opts_.v_hi, opts_.penalty_weight, nullptr);
    }
    return c;
  }

  std::vector<ParticleProblem> particles_;
  CostWeights weights_;
  TrajoptOptions opts_;
  Eigen::VectorXd goal_;
};

Plan optimize(const AverageProblem& problem, const ReferencePlan& ref,
              const TrajoptOptions& opts) {
  Eigen::MatrixXd v = ref.v_ref;
  Evaluation ev = problem.evaluate(v);
  if (!ev.ok) {
    throw NumericError("warm-start rollout failed; nothing to optimize from");
  }

  Eigen::MatrixXd best_v = v;
  Evaluation best_ev = ev;
  std::vector<double> history{ev.objective};
  bool converged = false;
  double alpha = 1.0;
  int iter = 0;

  for (; iter < opts.max_iters; ++iter) {
    const Eigen::MatrixXd g = problem.gradient(v, ev);
    if (g.lpNorm<Eigen::Infinity>() <= opts.tol) {
      converged = true;
      break;
    }
    const double slope = -g.squaredNorm();
    double a = alpha;
    bool accepted = false;
    Evaluation cand_ev;
    Eigen::MatrixXd cand_v;
    while (a > 1e-18) {
      cand_v = v - a * g;
      cand_ev = problem.evaluate(cand_v);
      if (cand_ev.ok && cand_ev.objective <= ev.objective + opts.armijo_c * a * slope) {
        accepted = true;
        break;
      }
      a *= opts.backtrack;
    }
    if (!accepted) {
      converged = true;  // no usable descent left at this scale
      break;
    }
    const double decrease = ev.objective - cand_ev.objective;
    v = cand_v;
    ev = cand_ev;
    history.push_back(ev.objective);
    if (ev.objective < best_ev.objective) {
      best_v = v;
      best_ev = ev;
    }
    alpha = std::min(a * 2.0, 1e6);
    if (decrease < opts.min_decrease) {
      converged = true;
      ++iter;
      break;
    }
  }

  Plan plan;
  plan.v_opt = best_v;
  plan.x_opt = best_ev.rollouts[0];
  if (problem.particles().size() > 1) plan.per_particle_x = best_ev.rollouts;
  plan.converged = converged;
  plan.final_cost = best_ev.objective;
  plan.iterations = iter;
  plan.cost_history = std::move(history);
  plan.goal = ref.goal();
  plan.kappa = opts.kappa;
  return plan;
}

}  // namespace

Plan sp_trajopt(const SceneModel& scene, const ShapeParam& p, const ReferencePlan& reference,
                const CostWeights& weights, const TrajoptOptions& opts) {
  ParticleProblem prob;
  prob.scene = scene;
  prob.x0 = p.x_init ? p.x_init(p.p) : Eigen::VectorXd(reference.x_ref.row(0).transpose());
  AverageProblem ap({prob}, reference, weights, opts);
  return optimize(ap, reference, opts);
}

Plan mp_trajopt(const SceneFamily& family, const std::vector<ShapeParam>& particles,
                const ReferencePlan& reference, const CostWeights& weights,
                const TrajoptOptions& opts) {
  if (particles.empty()) throw ConfigError("mp_trajopt needs at least one particle");
  std::vector<ParticleProblem> probs;
  probs.reserve(particles.size());
  for (const ShapeParam& p : particles) {
    auto [scene, x0] = family(p);
    probs.push_back({std::move(scene), std::move(x0)});
  }
  AverageProblem ap(std::move(probs), reference, weights, opts);
  return optimize(ap, reference, opts);
}

ReferencePlan generate_reference(const Scenario& scenario, const Eigen::VectorXd& x0,
                                 const Eigen::VectorXd& goal_pose, int T,
                                 const ReferenceOptions& opts) {
  if (T < 4 || T > 64) throw ConfigError("reference horizon must lie in [4, 64]");
  const SceneModel& sc = scenario.scene;
  if (x0.size() != sc.n_x()) throw ConfigError("x0 size does not match scenario");

  ReferencePlan ref;
  ref.x_ref.resize(T + 1, sc.n_x());
  ref.v_ref.resize(T, sc.n_a());

  if (scenario.spec.kind == ScenarioSpec::Kind::kLine) {
    if (goal_pose.size() != 1) throw ConfigError("line goal has one coordinate");
    if (std::abs(goal_pose[0]) > scenario.spec.workspace_halfwidth) {
      throw ConfigError("goal outside workspace bounds");
    }
    const double contact = scenario.spec.object_radius + scenario.spec.finger_radius;
    for (int t = 0; t <= T; ++t) {
      const double s = static_cast<double>(t) / T;
      const double obj = x0[0] + s * (goal_pose[0] - x0[0]);
      ref.x_ref(t, 0) = obj;
      ref.x_ref(t, 1) = obj - contact;  // finger reference rides the surface
    }
    ref.x_ref.row(0) << x0[0], x0[1];
    for (int t = 0; t < T; ++t) {
      const double s = static_cast<double>(t + 1) / T;
      const double obj = x0[0] + s * (goal_pose[0] - x0[0]);
      ref.v_ref(t, 0) = obj - contact + opts.press;  // commanded engagement
    }
    return ref;
  }

  if (goal_pose.size() != 3) throw ConfigError("planar goal has three coordinates");
  if (std::abs(goal_pose[0]) > scenario.spec.workspace_halfwidth ||
      std::abs(goal_pose[1]) > scenario.spec.workspace_halfwidth ||
      std::abs(goal_pose[2]) > 4.0 * M_PI) {
    throw ConfigError("goal outside workspace bounds");
  }

  const Eigen::Vector3d pose0 = x0.head<3>();
  // Keep each finger's angular slot relative to the object; reference states
  // ride the surface while commands engage by `press`.
  const double surface = scenario.spec.object_radius + scenario.spec.finger_radius;
  double slot_angles[2];
  for (int k = 0; k < 2; ++k) {
    const Eigen::Vector2d rel = x0.segment<2>(3 + 2 * k) - pose0.head<2>();
    slot_angles[k] = std::atan2(rel.y(), rel.x()) - pose0[2];
  }

  auto finger_pos = [&](const Eigen::Vector3d& pose, int k, double dist) {
    const double ang = pose[2] + slot_angles[k];
    return Eigen::Vector2d(pose.x() + dist * std::cos(ang), pose.y() + dist * std::sin(ang));
  };

  for (int t = 0; t <= T; ++t) {
    const double s = static_cast<double>(t) / T;
    const Eigen::Vector3d pose = pose0 + s * (Eigen::Vector3d(goal_pose) - pose0);
    ref.x_ref.block<1, 3>(t, 0) = pose.transpose();
    for (int k = 0; k < 2; ++k) {
      ref.x_ref.block<1, 2>(t, 3 + 2 * k) = finger_pos(pose, k, surface).transpose();
    }
  }
  ref.x_ref.row(0) = x0.transpose();
  for (int t = 0; t < T; ++t) {
    const double s = static_cast<double>(t + 1) / T;
    const Eigen::Vector3d pose = pose0 + s * (Eigen::Vector3d(goal_pose) - pose0);
    for (int k = 0; k < 2; ++k) {
      ref.v_ref.block<1, 2>(t, 2 * k) = finger_pos(pose, k, surface - opts.press).transpose();
    }
  }
  return ref;
}

TrajoptOptions default_trajopt_options(const Scenario& scenario) {
  TrajoptOptions opts;
  opts.kappa = scenario.spec.kappa_plan;
  opts.x_lo = scenario.x_lo;
  opts.x_hi = scenario.x_hi;
  opts.v_lo = scenario.v_lo;
  opts.v_hi = scenario.v_hi;
  opts.noncollide_bodies = scenario.finger_body_pairs;
  return opts;
}

CostWeights default_cost_weights(int n_u, int n_a) {
  CostWeights w;
  Eigen::VectorXd q(n_u + n_a), qT(n_u + n_a);
  q.head(n_u).setConstant(10.0);
  q.tail(n_a).setConstant(0.1);
  qT.head(n_u).setConstant(1000.0);
  qT.tail(n_a).setConstant(0.1);
  w.Q_t = q.asDiagonal();
  w.Q_T = qT.asDiagonal();
  w.R_t = Eigen::MatrixXd::Identity(n_a, n_a) * 5.0;
  return w;
}

}  // namespace csc
