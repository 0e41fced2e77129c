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

#include "csc/linearize.hpp"

#include <Eigen/Eigenvalues>

#include "csc/barrier.hpp"
#include "csc/detail/geometry.hpp"

namespace csc {

namespace {

constexpr double kCondCap = 1e12;

// Hessian of the step objective at dq (double path, reused from the solver).
Eigen::MatrixXd barrier_hessian(const QpData& qp, const Eigen::VectorXd& dq, double kappa) {
  Eigen::MatrixXd H = qp.Q;
  for (const ContactInfo& c : qp.contacts) {
    const bool fr = c.t_dim() > 0;
    const double wn = c.phi + c.J_n.dot(dq);
    const double wt = fr ? c.J_t.row(0).dot(dq) : 0.0;
    double hnn, hnt, htt;
    barrier::hessian(wn, wt, c.mu, fr, &hnn, &hnt, &htt);
    H -= (c.J_n.transpose() * hnn * c.J_n) / kappa;
    if (fr) {
      const auto jt = c.J_t.row(0);
      H -= (c.J_n.transpose() * hnt * jt + jt.transpose() * hnt * c.J_n + jt.transpose() * htt * jt) /
           kappa;
    }
  }
  return H;
}

}  // namespace

Linearization linearize(const SceneModel& scene, const Configuration& q, const Eigen::VectorXd& u,
                        double kappa) {
  const StepResult step = smoothed_step(scene, q, u, kappa);
  const Eigen::VectorXd& dq = step.dq_star;
  const int nx = scene.n_x();
  const int na = scene.n_a();
  const int nd = nx + na;

  const QpData qp = assemble_qp(scene, q, u, contact_kernel(scene, q));
  const Eigen::MatrixXd H = barrier_hessian(qp, dq, kappa);

  // Differentiate the stationarity residual G(dq*; q, u) with respect to
  // (q, u) by forward-mode AD through the contact geometry and b.
  using ADS = detail::ADScalar;
  const Eigen::VectorXd x = q.x();
  std::vector<ADS> x_ad(static_cast<size_t>(nx));
  std::vector<ADS> u_ad(static_cast<size_t>(na));
  for (int i = 0; i < nx; ++i) x_ad[static_cast<size_t>(i)] = ADS(x[i], nd, i);
  for (int j = 0; j < na; ++j) u_ad[static_cast<size_t>(j)] = ADS(u[j], nd, nx + j);

  const auto contacts_ad = detail::eval_contacts<ADS>(scene, x_ad);
  auto g_ad = detail::assemble_b<ADS>(scene, x_ad, u_ad);  // starts as b(q, u)
  for (const auto& c : contacts_ad) {
    ADS wn = c.phi;
    for (int k = 0; k < nx; ++k) wn += c.jn[static_cast<size_t>(k)] * dq[k];
    ADS wt = c.phi * 0.0;
    const bool fr = !c.jt.empty();
    if (fr) {
      for (int k = 0; k < nx; ++k) wt += c.jt[static_cast<size_t>(k)] * dq[k];
    }
    ADS gn, gt;
    barrier::gradient(wn, wt, c.mu, fr, &gn, &gt);
    for (int k = 0; k < nx; ++k) {
      g_ad[static_cast<size_t>(k)] -= c.jn[static_cast<size_t>(k)] * gn / kappa;
      if (fr) g_ad[static_cast<size_t>(k)] -= c.jt[static_cast<size_t>(k)] * gt / kappa;
    }
  }

  Eigen::MatrixXd dG(nx, nd);
  for (int i = 0; i < nx; ++i) {
    const auto& der = g_ad[static_cast<size_t>(i)].derivatives();
    if (der.size() == 0) {
      dG.row(i).setZero();
    } else {
      dG.row(i) = der.transpose();
    }
  }

  const Eigen::MatrixXd S = H.ldlt().solve(-dG);

  Linearization lin;
  lin.A = Eigen::MatrixXd::Identity(nx, nx) + S.leftCols(nx);
  lin.B = S.rightCols(na);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  lin.cond_estimate = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  lin.cond_warning = !(lin.cond_estimate < kCondCap);
  if (!lin.A.allFinite() || !lin.B.allFinite()) {
    throw NumericError("linearization produced non-finite entries");
  }
  return lin;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> finite_diff_linearize(const SceneModel& scene,
                                                                  const Configuration& q,
                                                                  const Eigen::VectorXd& u,
                                                                  double kappa, double step) {
  if (step <= 0.0) throw ConfigError("finite difference step must be > 0");
  const int nx = scene.n_x();
  const int na = scene.n_a();
  const Eigen::VectorXd x = q.x();

  auto f = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& us) {
    return smoothed_step(scene, scene.split(xs), us, kappa).q_next.x();
  };

  Eigen::MatrixXd A(nx, nx), B(nx, na);
  for (int i = 0; i < nx; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    A.col(i) = (f(xp, u) - f(xm, u)) / (2.0 * step);
  }
  for (int j = 0; j < na; ++j) {
    Eigen::VectorXd up = u, um = u;
    up[j] += step;
    um[j] -= step;
    B.col(j) = (f(x, up) - f(x, um)) / (2.0 * step);
  }
  return {A, B};
}

}  // namespace csc
