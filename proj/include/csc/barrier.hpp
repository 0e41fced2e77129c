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

// Log barrier for the dual friction cone {w : w_n >= mu |w_t|} restricted to
// a one-dimensional tangent. Frictionless pairs use B(w) = log(w_n); planar
// frictional pairs use B(w) = log(w_n^2 - mu^2 w_t^2) + log(w_n).
// The step objective subtracts (1/kappa) B, so -B is the convex barrier.

#include <cmath>
#include <limits>

namespace csc::barrier {

/// Distance from the cone boundary along w_n (frictionless: just w_n).
inline double cone_margin(double wn, double wt, double mu, bool frictional) {
  if (!frictional) return wn;
  return wn - mu * std::abs(wt);
}

inline bool interior(double wn, double wt, double mu, bool frictional) {
  return wn > 0.0 && cone_margin(wn, wt, mu, frictional) > 0.0;
}

/// Barrier degree nu: w . grad B(w) == nu on the interior.
inline double degree(bool frictional) { return frictional ? 3.0 : 1.0; }

/// B(w); -inf when not strictly interior (caller rejects such points).
inline double value(double wn, double wt, double mu, bool frictional) {
  if (!interior(wn, wt, mu, frictional)) return -std::numeric_limits<double>::infinity();
  if (!frictional) return std::log(wn);
  const double s = wn * wn - mu * mu * wt * wt;
  return std::log(s) + std::log(wn);
}

template <typename S>
void gradient(const S& wn, const S& wt, double mu, bool frictional, S* gn, S* gt) {
  if (!frictional) {
    *gn = 1.0 / wn;
    *gt = wn * 0.0;
    return;
  }
  const S s = wn * wn - wt * wt * (mu * mu);
  *gn = wn * 2.0 / s + 1.0 / wn;
  *gt = wt * (-2.0 * mu * mu) / s;
}

inline void hessian(double wn, double wt, double mu, bool frictional, double* hnn, double* hnt,
                    double* htt) {
  if (!frictional) {
    *hnn = -1.0 / (wn * wn);
    *hnt = 0.0;
    *htt = 0.0;
    return;
  }
  const double mu2 = mu * mu;
  const double s = wn * wn - mu2 * wt * wt;
  const double s2 = s * s;
  *hnn = 2.0 / s - 4.0 * wn * wn / s2 - 1.0 / (wn * wn);
  *hnt = 4.0 * mu2 * wn * wt / s2;
  *htt = -2.0 * mu2 / s - 4.0 * mu2 * mu2 * wt * wt / s2;
}

}  // namespace csc::barrier
