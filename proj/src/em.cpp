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

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/LU>

#include "otfsra/receiver.hpp"

namespace otfsra {

std::optional<PhaseRotationSet> em_update_phi(const std::vector<Eigen::MatrixXcd>& w_hat,
                                              const std::vector<Eigen::MatrixXd>& tau_w_post,
                                              const std::vector<Eigen::MatrixXcd>& Y,
                                              const std::vector<Eigen::MatrixXcd>& C_plain,
                                              double sigma2, int P_bar, const SystemConfig& cfg) {
  const int U = cfg.U, M = cfg.M, N = cfg.N, Q = cfg.Q;
  const int UM = U * M;
  if (P_bar < 1 || P_bar > UM) throw std::invalid_argument("em_update_phi: P_bar out of range");
  if (int(w_hat.size()) != M || int(tau_w_post.size()) != M || int(Y.size()) != M ||
      int(C_plain.size()) != M)
    throw std::invalid_argument("em_update_phi: expected M blocks");

  // Energy of each (u, l') tap summed over l; keep the P_bar strongest.
  std::vector<double> iota(UM, 0.0);
  for (int l = 0; l < M; ++l)
    for (int c = 0; c < UM; ++c) iota[c] += w_hat[l].middleRows(std::size_t(c) * N, N).squaredNorm();
  std::vector<int> order(UM);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return iota[a] > iota[b]; });
  std::vector<int> keep(order.begin(), order.begin() + P_bar);
  if (iota[keep.front()] <= 0.0) return std::nullopt;

  const int PN = P_bar * N;
  PhaseRotationSet out;
  out.phi = Eigen::MatrixXcd::Zero(Q, UM);
  out.support.assign(UM, false);
  for (int c : keep) out.support[c] = true;

  std::vector<Eigen::MatrixXcd> WE(M);
  std::vector<Eigen::VectorXd> varE(M);
  for (int l = 0; l < M; ++l) {
    WE[l].resize(PN, w_hat[l].cols());
    varE[l].resize(PN);
    for (int e = 0; e < P_bar; ++e) {
      WE[l].middleRows(e * N, N) = w_hat[l].middleRows(std::size_t(keep[e]) * N, N);
      varE[l].segment(e * N, N) = tau_w_post[l].middleRows(std::size_t(keep[e]) * N, N).rowwise().sum();
    }
  }

  for (int q = 0; q < Q; ++q) {
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(P_bar, P_bar);
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(P_bar);
    for (int l = 0; l < M; ++l) {
      Eigen::MatrixXcd CE(N, PN);
      for (int e = 0; e < P_bar; ++e)
        CE.middleCols(e * N, N) = C_plain[l].block(q * N, std::size_t(keep[e]) * N, N, N);
      const Eigen::MatrixXcd G = CE.adjoint() * CE;
      Eigen::MatrixXcd V = WE[l] * WE[l].adjoint();
      V.diagonal() += varE[l].cast<cd>();
      const Eigen::MatrixXcd Z = CE.adjoint() * Y[l].middleRows(q * N, N);
      for (int a = 0; a < P_bar; ++a) {
        for (int c = 0; c < P_bar; ++c) {
          // sum_{k1,k2} G[(a,k1),(c,k2)] V[(c,k2),(a,k1)]
          A(a, c) += (G.block(a * N, c * N, N, N).cwiseProduct(V.block(c * N, a * N, N, N).transpose())).sum();
        }
        b(a) += (Z.middleRows(a * N, N).cwiseProduct(WE[l].middleRows(a * N, N).conjugate())).sum();
      }
    }
    A.diagonal().array() += sigma2;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::VectorXcd x = lu.solve(b);
    if (!x.allFinite()) return std::nullopt;
    for (int e = 0; e < P_bar; ++e) {
      const double mag = std::abs(x(e));
      out.phi(q, keep[e]) = mag > 0.0 ? x(e) / mag : cd(0.0);
    }
  }
  return out;
}

std::optional<PhaseRotationSet> em_update_phi(const std::vector<Eigen::MatrixXcd>& w_hat,
                                              const std::vector<Eigen::MatrixXd>& tau_w_post,
                                              const std::vector<Eigen::MatrixXcd>& Y,
                                              const SpreadingCodeSet& codes, double sigma2,
                                              int P_bar, const SystemConfig& cfg) {
  const Eigen::MatrixXcd ones = Eigen::MatrixXcd::Ones(cfg.Q, cfg.U * cfg.M);
  std::vector<Eigen::MatrixXcd> C(cfg.M);
  for (int l = 0; l < cfg.M; ++l) C[l] = build_sensing_matrix(codes, ones, l, cfg);
  return em_update_phi(w_hat, tau_w_post, Y, C, sigma2, P_bar, cfg);
}

double em_noise_variance(const std::vector<GampState>& gamp, const std::vector<Eigen::MatrixXcd>& Y) {
  double acc = 0.0, count = 0.0;
  for (std::size_t l = 0; l < Y.size(); ++l) {
    acc += (Y[l] - gamp[l].r_hat).squaredNorm() + gamp[l].tau_r.sum();
    count += double(Y[l].size());
  }
  return acc / count;
}

void em_update_mixture(Mixture& mix, const MixtureStats& st) {
  if (!(st.chi >= kEmEps)) return;
  const int K = int(mix.omega.size());
  for (int k = 0; k < K; ++k) {
    if (!(st.s0[k] >= kEmEps)) continue;
    const cd mu_old = mix.mu[k];
    const double eta = (st.s2[k] - 2.0 * std::real(std::conj(mu_old) * st.s1[k]) +
                        std::norm(mu_old) * st.s0[k]) /
                       st.s0[k];
    mix.mu[k] = st.s1[k] / st.s0[k];
    if (eta > 0.0 && std::isfinite(eta)) mix.eta[k] = eta;
    mix.omega[k] = st.s0[k] / st.chi;
  }
  const double total = std::accumulate(mix.omega.begin(), mix.omega.end(), 0.0);
  if (total > 0.0)
    for (auto& w : mix.omega) w /= total;
}

void em_update_hyper(Hyperparameters& hyper, const std::vector<GampState>& gamp,
                     const std::vector<Eigen::MatrixXcd>& Y, const std::vector<MixtureStats>& stats) {
  hyper.sigma2 = em_noise_variance(gamp, Y);
  for (std::size_t u = 0; u < hyper.mix.size() && u < stats.size(); ++u)
    em_update_mixture(hyper.mix[u], stats[u]);
}

}  // namespace otfsra
