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

#include "csc/step.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "csc/barrier.hpp"

namespace csc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ConeState {
  double wn = 0.0;
  double wt = 0.0;  // 0 for frictionless pairs
};

std::vector<ConeState> cone_states(const std::vector<ContactInfo>& contacts,
                                   const Eigen::VectorXd& dq) {
  std::vector<ConeState> w(contacts.size());
  for (size_t i = 0; i < contacts.size(); ++i) {
    const ContactInfo& c = contacts[i];
    w[i].wn = c.phi + c.J_n.dot(dq);
    w[i].wt = c.t_dim() > 0 ? c.J_t.row(0).dot(dq) : 0.0;
  }
  return w;
}

bool all_interior(const std::vector<ContactInfo>& contacts, const std::vector<ConeState>& w) {
  for (size_t i = 0; i < contacts.size(); ++i) {
    if (!barrier::interior(w[i].wn, w[i].wt, contacts[i].mu, contacts[i].t_dim() > 0)) return false;
  }
  return true;
}

double objective(const QpData& qp, double kappa, const Eigen::VectorXd& dq,
                 const std::vector<ConeState>& w) {
  double f = 0.5 * dq.dot(qp.Q * dq) + qp.b.dot(dq);
  for (size_t i = 0; i < qp.contacts.size(); ++i) {
    const ContactInfo& c = qp.contacts[i];
    const double b = barrier::value(w[i].wn, w[i].wt, c.mu, c.t_dim() > 0);
    if (!std::isfinite(b)) return kInf;
    f -= b / kappa;
  }
  return f;
}

Eigen::VectorXd gradient(const QpData& qp, double kappa, const Eigen::VectorXd& dq,
                         const std::vector<ConeState>& w) {
  Eigen::VectorXd g = qp.Q * dq + qp.b;
  for (size_t i = 0; i < qp.contacts.size(); ++i) {
    const ContactInfo& c = qp.contacts[i];
    double gn, gt;
    barrier::gradient(w[i].wn, w[i].wt, c.mu, c.t_dim() > 0, &gn, &gt);
    g -= (c.J_n.transpose() * gn) / kappa;
    if (c.t_dim() > 0) g -= (c.J_t.row(0).transpose() * gt) / kappa;
  }
  return g;
}

Eigen::MatrixXd hessian(const QpData& qp, double kappa, const std::vector<ConeState>& w) {
  Eigen::MatrixXd H = qp.Q;
  for (size_t i = 0; i < qp.contacts.size(); ++i) {
    const ContactInfo& c = qp.contacts[i];
    double hnn, hnt, htt;
    barrier::hessian(w[i].wn, w[i].wt, c.mu, c.t_dim() > 0, &hnn, &hnt, &htt);
    H -= (c.J_n.transpose() * hnn * c.J_n) / kappa;
    if (c.t_dim() > 0) {
      const auto jt = c.J_t.row(0);
      H -= (c.J_n.transpose() * hnt * jt + jt.transpose() * hnt * c.J_n + jt.transpose() * htt * jt) /
           kappa;
    }
  }
  return H;
}

// Largest step along `dir` that keeps every cone argument strictly interior.
double boundary_step(const std::vector<ContactInfo>& contacts, const std::vector<ConeState>& w,
                     const Eigen::VectorXd& dir) {
  double alpha = kInf;
  for (size_t i = 0; i < contacts.size(); ++i) {
    const ContactInfo& c = contacts[i];
    const double dwn = c.J_n.dot(dir);
    if (c.t_dim() == 0) {
      if (dwn < 0.0) alpha = std::min(alpha, -w[i].wn / dwn);
      continue;
    }
    if (dwn < 0.0) alpha = std::min(alpha, -w[i].wn / dwn);
    const double mu2 = c.mu * c.mu;
    const double dwt = c.J_t.row(0).dot(dir);
    // (wn + a dwn)^2 - mu^2 (wt + a dwt)^2 hits zero at the cone boundary.
    const double qa = dwn * dwn - mu2 * dwt * dwt;
    const double qb = 2.0 * (w[i].wn * dwn - mu2 * w[i].wt * dwt);
    const double qc = w[i].wn * w[i].wn - mu2 * w[i].wt * w[i].wt;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (std::abs(qa) < 1e-300) {
      if (qb < 0.0) alpha = std::min(alpha, -qc / qb);
      continue;
    }
    if (disc < 0.0) {
      if (qa < 0.0) alpha = std::min(alpha, 0.0);  // cannot happen from interior
      continue;
    }
    const double sq = std::sqrt(disc);
    const double r1 = (-qb - sq) / (2.0 * qa);
    const double r2 = (-qb + sq) / (2.0 * qa);
    for (double r : {std::min(r1, r2), std::max(r1, r2)}) {
      if (r > 0.0) {
        alpha = std::min(alpha, r);
        break;
      }
    }
  }
  return alpha;
}

// Pushes dq along the contact normals until every cone argument clears a
// small margin. Mere interiority is not enough: a start at w ~ 1e-11 (left
// behind by an exactly-grazing previous step) makes the barrier Hessian
// numerically useless.
Eigen::VectorXd feasible_start(const QpData& qp) {
  const int nx = static_cast<int>(qp.b.size());
  Eigen::VectorXd dq = Eigen::VectorXd::Zero(nx);
  const double margin = 1e-6;

  auto cleared = [&](const std::vector<ConeState>& w) {
    for (size_t i = 0; i < qp.contacts.size(); ++i) {
      const ContactInfo& c = qp.contacts[i];
      if (barrier::cone_margin(w[i].wn, w[i].wt, c.mu, c.t_dim() > 0) < margin) return false;
    }
    return true;
  };

  auto w = cone_states(qp.contacts, dq);
  if (cleared(w)) return dq;

  for (int pass = 0; pass < 40; ++pass) {
    bool moved = false;
    w = cone_states(qp.contacts, dq);
    for (size_t i = 0; i < qp.contacts.size(); ++i) {
      const ContactInfo& c = qp.contacts[i];
      const bool fr = c.t_dim() > 0;
      const double need = fr ? c.mu * std::abs(w[i].wt) + margin : margin;
      if (w[i].wn < need) {
        const double jn2 = c.J_n.squaredNorm();
        if (jn2 < 1e-16) continue;
        dq += c.J_n.transpose() * ((need - w[i].wn) / jn2 * 1.05);
        moved = true;
      }
    }
    if (!moved) break;
  }
  w = cone_states(qp.contacts, dq);
  if (!all_interior(qp.contacts, w)) {
    throw NumericError("no strictly feasible start for the barrier step");
  }
  return dq;
}

// Floating-point floor on how accurately the gradient can be evaluated:
// barrier terms amplify cancellation in the cone arguments by the local
// curvature times the lever |phi| + |J dq|.
double gradient_noise(const QpData& qp, const Eigen::VectorXd& dq,
                      const std::vector<ConeState>& w, double kappa) {
  constexpr double eps = 2.3e-16;
  double noise = qp.b.lpNorm<Eigen::Infinity>() +
                 qp.Q.lpNorm<Eigen::Infinity>() * dq.lpNorm<Eigen::Infinity>();
  for (size_t i = 0; i < qp.contacts.size(); ++i) {
    const ContactInfo& c = qp.contacts[i];
    double hnn, hnt, htt;
    barrier::hessian(w[i].wn, w[i].wt, c.mu, c.t_dim() > 0, &hnn, &hnt, &htt);
    const double curv = (std::abs(hnn) + 2.0 * std::abs(hnt) + std::abs(htt)) / kappa;
    const double lever = std::abs(c.phi) + std::abs(w[i].wn - c.phi) + std::abs(w[i].wt);
    noise += curv * lever;
  }
  return eps * noise;
}

struct NewtonOut {
  Eigen::VectorXd dq;
  double grad_norm = 0.0;
  int iters = 0;
  double tol_used = 0.0;
};

NewtonOut newton_solve(const QpData& qp, double kappa, Eigen::VectorXd dq,
                       const NewtonOptions& opts) {
  const double scale = std::max(1.0, qp.b.lpNorm<Eigen::Infinity>());
  const double tol_accept = opts.tol * scale;

  auto w = cone_states(qp.contacts, dq);
  double f = objective(qp, kappa, dq, w);
  Eigen::VectorXd g = gradient(qp, kappa, dq, w);
  double res = g.lpNorm<Eigen::Infinity>();

  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    const double target = std::max(1e-3 * tol_accept, 4.0 * gradient_noise(qp, dq, w, kappa));
    if (res <= target) break;
    const Eigen::MatrixXd H = hessian(qp, kappa, w);
    const Eigen::VectorXd dir = H.ldlt().solve(-g);
    const double slope = g.dot(dir);
    if (!dir.allFinite() || slope >= 0.0) break;

    double alpha = std::min(1.0, 0.99 * boundary_step(qp.contacts, w, dir));
    bool accepted = false;
    for (int ls = 0; ls < 60 && alpha > 1e-16; ++ls) {
      const Eigen::VectorXd cand = dq + alpha * dir;
      const auto wc = cone_states(qp.contacts, cand);
      const double fc = objective(qp, kappa, cand, wc);
      if (std::isfinite(fc)) {
        const Eigen::VectorXd gc = gradient(qp, kappa, cand, wc);
        const double res_c = gc.lpNorm<Eigen::Infinity>();
        // Armijo, or plain residual contraction once F stops resolving.
        if (fc <= f + 1e-4 * alpha * slope || res_c <= 0.9 * res) {
          dq = cand;
          w = wc;
          f = fc;
          g = gc;
          res = res_c;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }

  const double tol_used = std::max(tol_accept, 8.0 * gradient_noise(qp, dq, w, kappa));
  if (res > tol_used) {
    throw NumericError("smoothed step Newton did not converge (residual " + std::to_string(res) +
                           ")",
                       res);
  }
  return {dq, res, iter, tol_used};
}

}  // namespace

QpData assemble_qp(const SceneModel& scene, const Configuration& q, const Eigen::VectorXd& u,
                   const std::vector<ContactInfo>& contacts) {
  const int nu = scene.n_u();
  const int na = scene.n_a();
  if (q.n_u() != nu || q.n_a() != na) throw ConfigError("configuration does not match scene");
  if (u.size() != na) throw ConfigError("command size must equal n_a");
  if (nu > 0 && scene.epsilon <= 0.0) {
    throw ConfigError("epsilon must be > 0 for scenes with object DoFs (Q would be singular)");
  }

  QpData qp;
  qp.Q = Eigen::MatrixXd::Zero(nu + na, nu + na);
  qp.Q.topLeftCorner(nu, nu) = scene.epsilon / scene.h * scene.M_u;
  qp.Q.bottomRightCorner(na, na) = (scene.h * scene.K_a).asDiagonal();
  qp.b.resize(nu + na);
  qp.b.head(nu) = -scene.h * scene.tau_u;
  qp.b.tail(na) = -scene.h * (scene.K_a.cwiseProduct(u - q.q_a) + scene.tau_a);
  qp.contacts = contacts;
  return qp;
}

StepResult smoothed_step(const SceneModel& scene, const Configuration& q, const Eigen::VectorXd& u,
                         double kappa, const NewtonOptions& opts) {
  if (kappa <= 0.0) throw ConfigError("kappa must be > 0");
  const QpData qp = assemble_qp(scene, q, u, contact_kernel(scene, q));
  const Eigen::VectorXd dq0 = feasible_start(qp);
  const NewtonOut out = newton_solve(qp, kappa, dq0, opts);

  StepResult r;
  r.dq_star = out.dq;
  r.grad_norm = out.grad_norm;
  r.tol_used = out.tol_used;
  r.newton_iters = out.iters;
  const Eigen::VectorXd xn = q.x() + out.dq;
  r.q_next = scene.split(xn);
  const auto w = cone_states(qp.contacts, out.dq);
  for (size_t i = 0; i < qp.contacts.size(); ++i) {
    const ContactInfo& c = qp.contacts[i];
    r.contacts.push_back(
        {c.pair_id, c.phi, barrier::cone_margin(w[i].wn, w[i].wt, c.mu, c.t_dim() > 0)});
  }
  return r;
}

namespace {

// Contact modes for the active-set polish.
enum Mode { kInactive = 0, kActiveNormal = 1, kSlidePos = 2, kSlideNeg = 3, kSticking = 4 };

struct PolishOut {
  Eigen::VectorXd dq;
  double residual = 0.0;
  bool ok = false;
  std::vector<int> modes;
};

PolishOut try_polish(const QpData& qp, const std::vector<int>& modes, double scale) {
  const int nx = static_cast<int>(qp.b.size());

  // Constraint rows: a_k . dq + c_k == 0, contact force = sum a_k' nu_k.
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  std::vector<std::pair<int, int>> row_contact;  // (contact, 0 normal row / 1 tangent row)
  for (size_t i = 0; i < qp.contacts.size(); ++i) {
    const ContactInfo& c = qp.contacts[i];
    switch (modes[i]) {
      case kInactive:
        break;
      case kActiveNormal:
        rows.push_back(c.J_n);
        rhs.push_back(c.phi);
        row_contact.push_back({static_cast<int>(i), 0});
        break;
      case kSticking:
        rows.push_back(c.J_n);
        rhs.push_back(c.phi);
        row_contact.push_back({static_cast<int>(i), 0});
        rows.push_back(c.J_t.row(0));
        rhs.push_back(0.0);
        row_contact.push_back({static_cast<int>(i), 1});
        break;
      case kSlidePos:
      case kSlideNeg: {
        const double s = modes[i] == kSlidePos ? 1.0 : -1.0;
        rows.push_back(c.J_n - s * c.mu * c.J_t.row(0));
        rhs.push_back(c.phi);
        row_contact.push_back({static_cast<int>(i), 0});
        break;
      }
    }
  }

  const int m = static_cast<int>(rows.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nx + m, nx + m);
  Eigen::VectorXd rhs_full(nx + m);
  kkt.topLeftCorner(nx, nx) = qp.Q;
  for (int k = 0; k < m; ++k) {
    kkt.block(nx + k, 0, 1, nx) = rows[static_cast<size_t>(k)];
    kkt.block(0, nx + k, nx, 1) = -rows[static_cast<size_t>(k)].transpose();
    rhs_full[nx + k] = -rhs[static_cast<size_t>(k)];
  }
  rhs_full.head(nx) = -qp.b;
  const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs_full);
  if (!sol.allFinite()) return {};

  PolishOut out;
  out.dq = sol.head(nx);
  out.modes = modes;

  // Recover per-contact impulses.
  std::vector<double> zn(qp.contacts.size(), 0.0), zt(qp.contacts.size(), 0.0);
  for (int k = 0; k < m; ++k) {
    const auto [ci, which] = row_contact[static_cast<size_t>(k)];
    const double nu = sol[nx + k];
    const ContactInfo& c = qp.contacts[static_cast<size_t>(ci)];
    if (modes[static_cast<size_t>(ci)] == kSlidePos || modes[static_cast<size_t>(ci)] == kSlideNeg) {
      const double s = modes[static_cast<size_t>(ci)] == kSlidePos ? 1.0 : -1.0;
      zn[static_cast<size_t>(ci)] = nu;
      zt[static_cast<size_t>(ci)] = -s * c.mu * nu;
    } else if (which == 0) {
      zn[static_cast<size_t>(ci)] = nu;
    } else {
      zt[static_cast<size_t>(ci)] = nu;
    }
  }

  // Verify primal/dual cone membership, slip direction, and stationarity.
  const double tol = 1e-9 * scale;
  double residual = 0.0;
  Eigen::VectorXd stat = qp.Q * out.dq + qp.b;
  for (size_t i = 0; i < qp.contacts.size(); ++i) {
    const ContactInfo& c = qp.contacts[i];
    const bool fr = c.t_dim() > 0;
    const double wn = c.phi + c.J_n.dot(out.dq);
    const double wt = fr ? c.J_t.row(0).dot(out.dq) : 0.0;
    stat -= c.J_n.transpose() * zn[i];
    if (fr) stat -= c.J_t.row(0).transpose() * zt[i];

    if (wn < -tol) return {};
    if (fr && wn - c.mu * std::abs(wt) < -tol) return {};
    if (zn[i] < -tol) return {};
    if (fr && std::abs(zt[i]) > c.mu * zn[i] + tol) return {};
    if (modes[i] == kSlidePos && wt < -tol) return {};
    if (modes[i] == kSlideNeg && wt > tol) return {};
    residual = std::max(residual, std::abs(wn * zn[i] + wt * zt[i]));
    residual = std::max(residual, std::max(0.0, -wn));
    residual = std::max(residual, std::max(0.0, -zn[i]));
  }
  residual = std::max(residual, stat.lpNorm<Eigen::Infinity>());
  out.residual = residual;
  out.ok = true;
  return out;
}

std::vector<int> classify(const QpData& qp, const Eigen::VectorXd& dq, double kappa) {
  std::vector<int> modes(qp.contacts.size(), kInactive);
  const auto w = cone_states(qp.contacts, dq);
  for (size_t i = 0; i < qp.contacts.size(); ++i) {
    const ContactInfo& c = qp.contacts[i];
    const bool fr = c.t_dim() > 0;
    double gn, gt;
    barrier::gradient(w[i].wn, w[i].wt, c.mu, fr, &gn, &gt);
    const double zn = gn / kappa;
    const double zt = gt / kappa;
    if (zn <= w[i].wn) continue;  // crossover test: force below gap scale
    if (!fr || c.mu < 1e-12) {
      modes[i] = kActiveNormal;
    } else if (std::abs(zt) < 0.98 * c.mu * zn) {
      modes[i] = kSticking;
    } else {
      modes[i] = zt < 0.0 ? kSlidePos : kSlideNeg;  // impulse opposes slip
    }
  }
  return modes;
}

std::vector<int> contact_mode_set(const QpData& qp, size_t i) {
  const ContactInfo& c = qp.contacts[i];
  if (c.t_dim() > 0 && c.mu >= 1e-12) return {kInactive, kSticking, kSlidePos, kSlideNeg};
  return {kInactive, kActiveNormal};
}

// Base classification first, then single flips, then the full product of
// per-contact modes (capped; reached only when the crossover test misjudges
// several contacts at once).
std::vector<std::vector<int>> mode_variants(const QpData& qp, const std::vector<int>& base) {
  std::vector<std::vector<int>> variants{base};
  for (size_t i = 0; i < base.size(); ++i) {
    for (int m : contact_mode_set(qp, i)) {
      if (m == base[i]) continue;
      auto v = base;
      v[i] = m;
      variants.push_back(std::move(v));
    }
  }
  size_t total = 1;
  for (size_t i = 0; i < base.size(); ++i) total *= contact_mode_set(qp, i).size();
  if (total <= 1024) {
    std::vector<std::vector<int>> all{{}};
    for (size_t i = 0; i < base.size(); ++i) {
      std::vector<std::vector<int>> next;
      for (const auto& prefix : all) {
        for (int m : contact_mode_set(qp, i)) {
          auto v = prefix;
          v.push_back(m);
          next.push_back(std::move(v));
        }
      }
      all = std::move(next);
    }
    for (auto& v : all) variants.push_back(std::move(v));
  }
  return variants;
}

}  // namespace

ExactStepInfo exact_step_info(const SceneModel& scene, const Configuration& q,
                              const Eigen::VectorXd& u, const ExactStepOptions& opts) {
  const QpData qp = assemble_qp(scene, q, u, contact_kernel(scene, q));
  const double scale = std::max(1.0, qp.b.lpNorm<Eigen::Infinity>());

  Eigen::VectorXd dq = feasible_start(qp);
  NewtonOptions nopts;
  int rounds = 0;
  double last_kappa = 0.0;
  // If a high-kappa round turns fragile, classify from the last solved round;
  // the polish certificate below still validates the final answer.
  for (double kappa = opts.kappa0; kappa <= opts.kappa_max * (1.0 + 1e-12); kappa *= 2.0) {
    bool solved = false;
    try {
      dq = newton_solve(qp, kappa, dq, nopts).dq;
      solved = true;
    } catch (const NumericError&) {
      try {
        dq = newton_solve(qp, kappa, feasible_start(qp), nopts).dq;
        solved = true;
      } catch (const NumericError&) {
      }
    }
    if (!solved) break;
    last_kappa = kappa;
    ++rounds;
  }
  if (last_kappa == 0.0) {
    throw NumericError("exact step continuation failed at the initial barrier weight");
  }

  const std::vector<int> base = classify(qp, dq, last_kappa);
  PolishOut best;
  for (const auto& modes : mode_variants(qp, base)) {
    best = try_polish(qp, modes, scale);
    if (best.ok) break;
  }
  if (!best.ok) {
    throw NumericError("exact step continuation stalled (no consistent active set)");
  }
  if (best.residual > opts.tol * scale) {
    throw NumericError("exact step certificate failed", best.residual);
  }

  ExactStepInfo info;
  info.dq = best.dq;
  info.q_next = scene.split(q.x() + best.dq);
  info.comp_residual = best.residual;
  info.continuation_rounds = rounds;
  info.modes = best.modes;
  return info;
}

Configuration exact_step(const SceneModel& scene, const Configuration& q,
                         const Eigen::VectorXd& u) {
  return exact_step_info(scene, q, u).q_next;
}

}  // namespace csc
