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

#include "csc/contact.hpp"

#include "csc/detail/geometry.hpp"

namespace csc {

std::vector<ContactInfo> contact_kernel(const SceneModel& scene, const Configuration& q) {
  const Eigen::VectorXd x = q.x();
  if (x.size() != scene.n_x()) throw ConfigError("configuration size does not match scene");
  std::vector<double> xv(x.data(), x.data() + x.size());
  const auto evals = detail::eval_contacts<double>(scene, xv);

  std::vector<ContactInfo> out;
  out.reserve(evals.size());
  for (const auto& e : evals) {
    ContactInfo c;
    c.phi = e.phi;
    c.mu = e.mu;
    c.pair_id = e.pair_id;
    c.J_n = Eigen::RowVectorXd::Zero(scene.n_x());
    for (int k = 0; k < scene.n_x(); ++k) c.J_n[k] = e.jn[static_cast<size_t>(k)];
    if (!e.jt.empty()) {
      c.J_t = Eigen::MatrixXd::Zero(1, scene.n_x());
      for (int k = 0; k < scene.n_x(); ++k) c.J_t(0, k) = e.jt[static_cast<size_t>(k)];
    } else {
      c.J_t = Eigen::MatrixXd::Zero(0, scene.n_x());
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace csc
