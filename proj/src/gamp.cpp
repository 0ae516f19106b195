// Copyright 2026 The otfsra Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>

#include "otfsra/receiver.hpp"

namespace otfsra {

void gamp_step(const Eigen::MatrixXcd& C, const Eigen::MatrixXd& C_abs2, const Eigen::MatrixXcd& Y,
               const Eigen::MatrixXcd& w_hat, const Eigen::MatrixXd& tau_w, double sigma2,
               double damping, GampState& st) {
  const auto rows = C.rows(), cols = C.cols(), Na = Y.cols();
  if (Y.rows() != rows || w_hat.rows() != cols || tau_w.rows() != cols || w_hat.cols() != Na ||
      tau_w.cols() != Na)
    throw std::invalid_argument("gamp_step: dimension mismatch");
  if (!st.started) {
    st.g_hat = Eigen::MatrixXcd::Zero(rows, Na);
    st.p_hat = Eigen::MatrixXcd::Zero(rows, Na);
  }

  st.tau_p = C_abs2 * tau_w;
  Eigen::MatrixXcd p_new = C * w_hat - (st.tau_p.cast<cd>().cwiseProduct(st.g_hat));
  st.p_hat = st.started ? Eigen::MatrixXcd(damping * p_new + (1.0 - damping) * st.p_hat) : p_new;

  const Eigen::ArrayXXd denom = st.tau_p.array() + sigma2;
  st.tau_r = (st.tau_p.array() * sigma2 / denom).matrix();
  st.r_hat = ((st.tau_p.array().cast<cd>() * Y.array() + sigma2 * st.p_hat.array()) /
              denom.cast<cd>())
                 .matrix();
  st.tau_g = denom.inverse().matrix();
  const Eigen::MatrixXcd g_new = ((Y - st.p_hat).array() * st.tau_g.array().cast<cd>()).matrix();
  st.g_hat = damping * g_new + (1.0 - damping) * st.g_hat;

  const Eigen::MatrixXd prec = C_abs2.transpose() * st.tau_g;
  const Eigen::MatrixXcd back = C.adjoint() * st.g_hat;
  st.tau_w_in.resize(cols, Na);
  st.r_hat_w.resize(cols, Na);
  for (Eigen::Index j = 0; j < Na; ++j)
    for (Eigen::Index v = 0; v < cols; ++v) {
      if (prec(v, j) > 0.0) {
        const double t = 1.0 / prec(v, j);
        st.tau_w_in(v, j) = t;
        st.r_hat_w(v, j) = w_hat(v, j) + t * back(v, j);
      } else {
        st.tau_w_in(v, j) = std::numeric_limits<double>::infinity();
        st.r_hat_w(v, j) = w_hat(v, j);
      }
    }
  st.started = true;

  if (!st.p_hat.allFinite() || !st.g_hat.allFinite() || !st.r_hat_w.allFinite() ||
      !st.tau_r.allFinite())
    throw DivergenceError("GAMP produced non-finite values");
}

void gamp_iteration(const std::vector<SensingBlock>& blocks, std::vector<GampState>& state,
                    const std::vector<Eigen::MatrixXcd>& w_hat,
                    const std::vector<Eigen::MatrixXd>& tau_w, double sigma2, double damping) {
  if (state.size() != blocks.size() || w_hat.size() != blocks.size() || tau_w.size() != blocks.size())
    throw std::invalid_argument("gamp_iteration: block count mismatch");
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const auto& b = blocks[l];
    gamp_step(b.C_phi, b.C_phi.cwiseAbs2(), b.Y, w_hat[l], tau_w[l], sigma2, damping, state[l]);
  }
}

}  // namespace otfsra
