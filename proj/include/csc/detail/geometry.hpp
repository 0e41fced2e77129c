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

// Contact geometry templated on the scalar type so the same formulas serve
// the double-precision solver path and the forward-mode AD path used by the
// implicit-function-theorem linearization.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/AutoDiff>

#include "csc/scene.hpp"

namespace csc::detail {

using ADScalar = Eigen::AutoDiffScalar<Eigen::VectorXd>;

inline double value_of(double v) { return v; }
inline double value_of(const ADScalar& v) { return v.value(); }

// Gap below which geometry is treated as degenerate (barrier undefined).
inline constexpr double kPenetrationCap = 1e-3;

// A zero whose derivative vector (if any) matches the seeded inputs. Eigen's
// AutoDiffScalar products do not size-cohere empty derivative vectors, so
// every stored constant must be built from a seeded value.
template <typename S>
S zero_like(const S& seeded) {
  return seeded * 0.0;
}

template <typename S>
struct ContactEval {
  S phi;
  std::vector<S> jn;  // length n_x; jn . dq/dt == dphi/dt
  std::vector<S> jt;  // empty (frictionless) or length n_x
  double mu = 0.0;
  int pair_id = 0;
};

// World-frame center of a body. Line-frame bodies live on anchor + axis * s.
template <typename S>
void body_center(const SceneModel& sc, const Body& b, const std::vector<S>& x, S* cx, S* cy) {
  const S zero = zero_like(x[0]);
  switch (b.frame) {
    case Body::Frame::kLine: {
      const S& s = x[static_cast<size_t>(sc.coord_index(b, 0))];
      *cx = s * b.axis.x() + b.anchor.x();
      *cy = s * b.axis.y() + b.anchor.y();
      return;
    }
    case Body::Frame::kPlanarXy:
    case Body::Frame::kPlanarSe2: {
      *cx = x[static_cast<size_t>(sc.coord_index(b, 0))];
      *cy = x[static_cast<size_t>(sc.coord_index(b, 1))];
      return;
    }
    case Body::Frame::kStatic: {
      *cx = zero + b.anchor.x();
      *cy = zero + b.anchor.y();
      return;
    }
  }
}

inline int rotation_index(const SceneModel& sc, const Body& b) {
  return b.frame == Body::Frame::kPlanarSe2 ? sc.coord_index(b, 2) : -1;
}

template <typename S>
ContactEval<S> eval_pair(const SceneModel& sc, const ContactPair& pair, int pair_id,
                         const std::vector<S>& x) {
  const Body& a = sc.bodies[static_cast<size_t>(pair.body_a)];
  const Body& b = sc.bodies[static_cast<size_t>(pair.body_b)];
  const int nx = sc.n_x();

  const S zero = zero_like(x[0]);
  ContactEval<S> out;
  out.mu = pair.mu;
  out.pair_id = pair_id;
  out.jn.assign(static_cast<size_t>(nx), zero);
  if (pair.frictional) out.jt.assign(static_cast<size_t>(nx), zero);

  const bool both_line = a.frame == Body::Frame::kLine && b.frame == Body::Frame::kLine;
  if (both_line) {
    // Signed axial gap; body_a sits on the smaller-coordinate side.
    const int ia = sc.coord_index(a, 0);
    const int ib = sc.coord_index(b, 0);
    const S sa = x[static_cast<size_t>(ia)] + a.anchor.dot(a.axis);
    const S sb = x[static_cast<size_t>(ib)] + b.anchor.dot(b.axis);
    out.phi = sb - sa - (a.radius + b.radius);
    out.jn[static_cast<size_t>(ib)] = zero + 1.0;
    out.jn[static_cast<size_t>(ia)] = zero - 1.0;
    return out;
  }

  const bool a_plane = a.kind == Body::Kind::kHalfPlane;
  const bool b_plane = b.kind == Body::Kind::kHalfPlane;
  if (a_plane || b_plane) {
    const Body& plane = a_plane ? a : b;
    const Body& disc = a_plane ? b : a;
    S cx, cy;
    body_center(sc, disc, x, &cx, &cy);
    const double nxw = plane.axis.x(), nyw = plane.axis.y();
    out.phi = nxw * cx + nyw * cy - plane.plane_offset - disc.radius;
    const int i0 = sc.coord_index(disc, 0);
    const int i1 = sc.coord_index(disc, 1);
    out.jn[static_cast<size_t>(i0)] = zero + nxw;
    out.jn[static_cast<size_t>(i1)] = zero + nyw;
    if (pair.frictional) {
      // Tangent perp(n); the contact-point slip picks up -r * omega.
      const double txw = -nyw, tyw = nxw;
      out.jt[static_cast<size_t>(i0)] = zero + txw;
      out.jt[static_cast<size_t>(i1)] = zero + tyw;
      const int ith = rotation_index(sc, disc);
      if (ith >= 0) out.jt[static_cast<size_t>(ith)] = zero - disc.radius;
    }
    return out;
  }

  // Disc/point vs disc/point in the plane. Normal points from b to a.
  S ax, ay, bx, by;
  body_center(sc, a, x, &ax, &ay);
  body_center(sc, b, x, &bx, &by);
  const S dx = ax - bx;
  const S dy = ay - by;
  const S len = sqrt(dx * dx + dy * dy);
  if (value_of(len) < 1e-12) {
    throw GeometryError("coincident centers in contact pair " + std::to_string(pair_id));
  }
  out.phi = len - (a.radius + b.radius);
  const S nhx = dx / len;
  const S nhy = dy / len;
  const int a0 = sc.coord_index(a, 0), a1 = sc.coord_index(a, 1);
  const int b0 = sc.coord_index(b, 0), b1 = sc.coord_index(b, 1);
  out.jn[static_cast<size_t>(a0)] = nhx;
  out.jn[static_cast<size_t>(a1)] = nhy;
  out.jn[static_cast<size_t>(b0)] = -nhx;
  out.jn[static_cast<size_t>(b1)] = -nhy;
  if (pair.frictional) {
    const S thx = -nhy;
    const S thy = nhx;
    out.jt[static_cast<size_t>(a0)] = thx;
    out.jt[static_cast<size_t>(a1)] = thy;
    out.jt[static_cast<size_t>(b0)] = -thx;
    out.jt[static_cast<size_t>(b1)] = -thy;
    const int ath = rotation_index(sc, a);
    const int bth = rotation_index(sc, b);
    if (ath >= 0) out.jt[static_cast<size_t>(ath)] = zero - a.radius;
    if (bth >= 0) out.jt[static_cast<size_t>(bth)] = zero - b.radius;
  }
  return out;
}

template <typename S>
std::vector<ContactEval<S>> eval_contacts(const SceneModel& sc, const std::vector<S>& x) {
  std::vector<ContactEval<S>> out;
  out.reserve(sc.pairs.size());
  for (size_t i = 0; i < sc.pairs.size(); ++i) {
    ContactEval<S> c = eval_pair(sc, sc.pairs[i], static_cast<int>(i), x);
    if (value_of(c.phi) <= -kPenetrationCap) {
      throw GeometryError("overlapping primitives in contact pair " + std::to_string(i) +
                              " (phi = " + std::to_string(value_of(c.phi)) + ")",
                          value_of(c.phi));
    }
    out.push_back(std::move(c));
  }
  return out;
}

// b = -h [tau_u; K_a (u - q_a) + tau_a]
template <typename S>
std::vector<S> assemble_b(const SceneModel& sc, const std::vector<S>& x, const std::vector<S>& u) {
  const int nu = sc.n_u();
  const int na = sc.n_a();
  const S zero = zero_like(x[0]);
  std::vector<S> b(static_cast<size_t>(nu + na));
  for (int i = 0; i < nu; ++i) b[static_cast<size_t>(i)] = zero - sc.h * sc.tau_u[i];
  for (int j = 0; j < na; ++j) {
    const S& qa = x[static_cast<size_t>(nu + j)];
    b[static_cast<size_t>(nu + j)] = (u[static_cast<size_t>(j)] - qa) * (-sc.h * sc.K_a[j]) -
                                     sc.h * sc.tau_a[j];
  }
  return b;
}

}  // namespace csc::detail
