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

#include <doctest.h>

#include <numeric>

#include "oracles.hpp"
#include "otfsra/receiver.hpp"

using namespace otfsra;

TEST_CASE("phase M-step recovers a fractional Doppler rotation") {
  for (double kf : {-0.4, 0.13, 0.37})
    for (int Q : {2, 4, 8}) CHECK(oracle::em_phi_phase_error(7, kf, Q) < 1e-6);
}

TEST_CASE("noise variance of a perfect fit is zero") {
  std::vector<Eigen::MatrixXcd> Y(2, Eigen::MatrixXcd::Constant(3, 2, cd(1.0, -2.0)));
  std::vector<GampState> st(2);
  for (auto& s : st) {
    s.r_hat = Y[0];
    s.tau_r = Eigen::MatrixXd::Zero(3, 2);
  }
  CHECK(em_noise_variance(st, Y) == 0.0);
  st[1].tau_r.setConstant(0.6);
  st[0].r_hat(0, 0) += 1.2;
  // (1.44 + 6 * 0.6) / 12
  CHECK(em_noise_variance(st, Y) == doctest::Approx(5.04 / 12.0).epsilon(1e-14));
}

TEST_CASE("mixture M-step is a responsibility-weighted fit") {
  Mixture mix{{0.5, 0.5}, {0.0, 0.0}, {1.0, 1.0}};
  MixtureStats st(2);
  // Component 0 owns samples 1 and 3 with weights 1 and 3; component 1 owns 2i with weight 4.
  st.s0 = {4.0, 4.0};
  st.s1 = {cd(1.0 + 9.0, 0.0), cd(0.0, 8.0)};
  st.s2 = {1.0 + 27.0, 16.0 + 4.0 * 0.5};
  st.chi = 8.0;
  em_update_mixture(mix, st);
  CHECK(std::abs(mix.mu[0] - cd(2.5, 0.0)) < 1e-15);
  CHECK(std::abs(mix.mu[1] - cd(0.0, 2.0)) < 1e-15);
  // Spread measured around the previous means (zero here).
  CHECK(mix.eta[0] == doctest::Approx(7.0));
  CHECK(mix.eta[1] == doctest::Approx(4.5));
  CHECK(mix.omega[0] == doctest::Approx(0.5));
  CHECK(std::accumulate(mix.omega.begin(), mix.omega.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("weights stay normalized when one component is empty") {
  Mixture mix{{0.3, 0.7}, {cd(1, 0), cd(0, 1)}, {1.0, 2.0}};
  MixtureStats st(2);
  st.s0 = {2.0, 0.0};
  st.s1 = {cd(2.0, 2.0), 0.0};
  st.s2 = {6.0, 0.0};
  st.chi = 2.0;
  em_update_mixture(mix, st);
  CHECK(mix.mu[1] == cd(0, 1));
  CHECK(mix.eta[1] == 2.0);
  CHECK(mix.omega[0] + mix.omega[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("no support leaves the mixture untouched") {
  const Mixture before{{0.3, 0.7}, {cd(1, 0), cd(0, 1)}, {1.0, 2.0}};
  Mixture mix = before;
  em_update_mixture(mix, MixtureStats(2));
  CHECK(mix.omega == before.omega);
  CHECK(mix.mu == before.mu);
  CHECK(mix.eta == before.eta);
}

TEST_CASE("hyperparameter update touches every device") {
  Hyperparameters h;
  h.mix.assign(2, Mixture{{1.0}, {0.0}, {1.0}});
  std::vector<MixtureStats> st(2, MixtureStats(1));
  st[1].s0 = {2.0};
  st[1].s1 = {cd(4.0, 0.0)};
  st[1].s2 = {10.0};
  st[1].chi = 2.0;
  std::vector<Eigen::MatrixXcd> Y(1, Eigen::MatrixXcd::Ones(2, 1));
  std::vector<GampState> g(1);
  g[0].r_hat = Eigen::MatrixXcd::Zero(2, 1);
  g[0].tau_r = Eigen::MatrixXd::Zero(2, 1);
  em_update_hyper(h, g, Y, st);
  CHECK(h.sigma2 == doctest::Approx(1.0));
  CHECK(h.mix[0].mu[0] == cd(0.0));
  CHECK(h.mix[1].mu[0] == cd(2.0, 0.0));
}
