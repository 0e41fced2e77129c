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

// Brute-force oracles kept independent of the implementation paths they
// check: a grid minimizer for the barrier objective, a contact-mode
// enumeration for the 1-D exact step, and a dense finite-horizon QP for the
// Riccati recursion.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "csc/barrier.hpp"
#include "csc/scene.hpp"
#include "csc/step.hpp"

namespace csc::oracles {

/// Barrier objective value at dq (infinite when any cone argument leaves the
/// strict interior). Re-derived here from first principles.
inline double barrier_objective(const QpData& qp, double kappa, const Eigen::VectorXd& dq) {
  double f = 0.5 * dq.dot(qp.Q * dq) + qp.b.dot(dq);
  for (const auto& c : qp.contacts) {
    const bool fr = c.t_dim() > 0;
    const double wn = c.phi + c.J_n.dot(dq);
    const double wt = fr ? c.J_t.row(0).dot(dq) : 0.0;
    const double b = barrier::value(wn, wt, c.mu, fr);
    if (!std::isfinite(b)) return std::numeric_limits<double>::infinity();
    f -= b / kappa;
  }
  return f;
}

/// Multi-resolution grid minimization over two coordinates; independent of
/// the Newton path. Returns the best dq found.
inline Eigen::VectorXd grid_minimize_2d(const QpData& qp, double kappa, double halfwidth,
                                        int grid = 41, int refinements = 14) {
  Eigen::Vector2d center(0.0, 0.0);
  double width = halfwidth;
  Eigen::Vector2d best = center;
  double best_f = std::numeric_limits<double>::infinity();
  for (int r = 0; r < refinements; ++r) {
    for (int i = 0; i < grid; ++i) {
      for (int j = 0; j < grid; ++j) {
        Eigen::VectorXd dq(2);
        dq << center.x() + width * (2.0 * i / (grid - 1) - 1.0),
            center.y() + width * (2.0 * j / (grid - 1) - 1.0);
        const double f = barrier_objective(qp, kappa, dq);
        if (f < best_f) {
          best_f = f;
          best = dq;
        }
      }
    }
    center = best;
    width *= 0.25;
  }
  return best;
}

/// 1-D frictionless exact step by enumerating the two contact modes of the
/// single declared pair and picking the feasible one.
inline Eigen::VectorXd exact_1d_enumerate(const QpData& qp) {
  const Eigen::MatrixXd& Q = qp.Q;
  const Eigen::VectorXd& b = qp.b;
  const ContactInfo& c = qp.contacts.at(0);

  // Mode OFF: unconstrained minimum, feasible iff the gap stays nonnegative.
  const Eigen::VectorXd dq_off = Q.ldlt().solve(-b);
  if (c.phi + c.J_n.dot(dq_off) >= -1e-12) return dq_off;

  // Mode ON: gap pinned to zero, feasible iff the impulse pushes.
  const int n = static_cast<int>(b.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 1, n + 1);
  kkt.topLeftCorner(n, n) = Q;
  kkt.block(n, 0, 1, n) = c.J_n;
  kkt.block(0, n, n, 1) = -c.J_n.transpose();
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = -b;
  rhs[n] = -c.phi;
  const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
  if (sol[n] < -1e-12) {
    throw std::logic_error("mode enumeration found no feasible mode");
  }
  return sol.head(n);
}

/// First-step feedback map of the finite-horizon LQR by dense least squares
/// over the stacked input sequence.
inline Eigen::MatrixXd dense_lqr_first_gain(const std::vector<Eigen::MatrixXd>& A_seq,
                                            const std::vector<Eigen::MatrixXd>& B_seq,
                                            const std::vector<Eigen::MatrixXd>& Q_seq,
                                            const std::vector<Eigen::MatrixXd>& R_seq,
                                            const Eigen::MatrixXd& Q_T) {
  const int T = static_cast<int>(A_seq.size());
  const int n = static_cast<int>(A_seq[0].rows());
  const int m = static_cast<int>(B_seq[0].cols());

  // x_t = Phi_t x_0 + sum_{s<t} M_{t,s} v_s.
  std::vector<Eigen::MatrixXd> phi(static_cast<size_t>(T) + 1);
  phi[0] = Eigen::MatrixXd::Identity(n, n);
  for (int t = 0; t < T; ++t) phi[static_cast<size_t>(t) + 1] = A_seq[static_cast<size_t>(t)] * phi[static_cast<size_t>(t)];

  auto reach = [&](int t, int s) {
    Eigen::MatrixXd M = B_seq[static_cast<size_t>(s)];
    for (int k = s + 1; k < t; ++k) M = A_seq[static_cast<size_t>(k)] * M;
    return M;  // effect of v_s on x_t (s < t)
  };

  Eigen::MatrixXd Hqp = Eigen::MatrixXd::Zero(T * m, T * m);
  Eigen::MatrixXd Gqp = Eigen::MatrixXd::Zero(T * m, n);
  for (int t = 1; t <= T; ++t) {
    const Eigen::MatrixXd& W = t == T ? Q_T : Q_seq[static_cast<size_t>(t)];
    for (int s = 0; s < t; ++s) {
      const Eigen::MatrixXd Ms = reach(t, s);
      Gqp.block(s * m, 0, m, n) += Ms.transpose() * W * phi[static_cast<size_t>(t)];
      for (int r = 0; r < t; ++r) {
        Hqp.block(s * m, r * m, m, m) += Ms.transpose() * W * reach(t, r);
      }
    }
  }
  for (int s = 0; s < T; ++s) Hqp.block(s * m, s * m, m, m) += R_seq[static_cast<size_t>(s)];

  // V* = -H^-1 G x0; the first-step policy is the top m rows.
  const Eigen::MatrixXd sol = Hqp.ldlt().solve(Gqp);
  return sol.topRows(m);
}

}  // namespace csc::oracles
