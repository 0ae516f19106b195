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

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "otfsra/receiver.hpp"

using namespace otfsra;

namespace {

Eigen::MatrixXcd scalar(cd x) {
  Eigen::MatrixXcd m(1, 1);
  m(0, 0) = x;
  return m;
}

Eigen::MatrixXd scalar_r(double x) { return Eigen::MatrixXd::Constant(1, 1, x); }

}  // namespace

TEST_CASE("scalar system follows the hand recursion") {
  const cd c(0.8, -0.6), y(1.3, 0.4);
  const double s2 = 0.2, d = 0.7;
  const auto C = scalar(c), Y = scalar(y);
  const Eigen::MatrixXd C2 = C.cwiseAbs2();
  GampState st;

  // First call: no previous p, g starts at zero and is still damped.
  const cd w0(0.1, 0.2);
  const double tw0 = 0.9;
  gamp_step(C, C2, Y, scalar(w0), scalar_r(tw0), s2, d, st);
  const double tp0 = std::norm(c) * tw0;
  const cd p0 = c * w0;
  const double tg0 = 1.0 / (tp0 + s2);
  const cd g0 = d * (y - p0) * tg0;
  const double tin0 = 1.0 / (std::norm(c) * tg0);
  CHECK(std::abs(st.p_hat(0, 0) - p0) < 1e-15);
  CHECK(st.tau_r(0, 0) == doctest::Approx(tp0 * s2 / (tp0 + s2)).epsilon(1e-15));
  CHECK(std::abs(st.r_hat(0, 0) - (tp0 * y + s2 * p0) / (tp0 + s2)) < 1e-15);
  CHECK(std::abs(st.g_hat(0, 0) - g0) < 1e-15);
  CHECK(st.tau_w_in(0, 0) == doctest::Approx(tin0).epsilon(1e-15));
  CHECK(std::abs(st.r_hat_w(0, 0) - (w0 + tin0 * std::conj(c) * g0)) < 1e-15);

  // Second call: p gets the Onsager term and both p and g are damped.
  const cd w1(0.5, -0.1);
  const double tw1 = 0.3;
  gamp_step(C, C2, Y, scalar(w1), scalar_r(tw1), s2, d, st);
  const double tp1 = std::norm(c) * tw1;
  const cd p1 = d * (c * w1 - tp1 * g0) + (1 - d) * p0;
  const double tg1 = 1.0 / (tp1 + s2);
  const cd g1 = d * (y - p1) * tg1 + (1 - d) * g0;
  const double tin1 = 1.0 / (std::norm(c) * tg1);
  CHECK(std::abs(st.p_hat(0, 0) - p1) < 1e-15);
  CHECK(std::abs(st.g_hat(0, 0) - g1) < 1e-15);
  CHECK(std::abs(st.r_hat_w(0, 0) - (w1 + tin1 * std::conj(c) * g1)) < 1e-15);
}

TEST_CASE("prior collapsed on the truth returns the truth") {
  Rng rng(31);
  Eigen::MatrixXcd C(6, 9), W(9, 2);
  for (int i = 0; i < C.size(); ++i) C(i) = oracle::cnormal(rng, 1.0 / 6);
  for (int i = 0; i < W.size(); ++i) W(i) = oracle::cnormal(rng);
  const Eigen::MatrixXcd Y = C * W;
  GampState st;
  gamp_step(C, C.cwiseAbs2(), Y, W, Eigen::MatrixXd::Constant(9, 2, 1e-14), 1e-10, 0.7, st);
  CHECK((st.r_hat_w - W).norm() < 1e-8 * W.norm());
}

TEST_CASE("fixed point matches the linear MMSE estimate") {
  for (std::uint64_t s = 1; s <= 5; ++s) CHECK(oracle::gamp_vs_lmmse(s, 24, 32).rel_error < 1e-3);
}

TEST_CASE("variances stay positive and finite") {
  Rng rng(32);
  Eigen::MatrixXcd C(8, 12), Y(8, 3), W = Eigen::MatrixXcd::Zero(12, 3);
  for (int i = 0; i < C.size(); ++i) C(i) = oracle::cnormal(rng, 1.0 / 8);
  for (int i = 0; i < Y.size(); ++i) Y(i) = oracle::cnormal(rng);
  GampState st;
  const Eigen::MatrixXd C2 = C.cwiseAbs2();
  for (int it = 0; it < 20; ++it) {
    gamp_step(C, C2, Y, W, Eigen::MatrixXd::Constant(12, 3, 0.5), 0.1, 0.7, st);
    CHECK(st.tau_p.minCoeff() > 0.0);
    CHECK(st.tau_g.minCoeff() > 0.0);
    CHECK(st.tau_w_in.minCoeff() > 0.0);
    CHECK(st.tau_w_in.allFinite());
  }
}

TEST_CASE("zero-energy columns pass their prior through") {
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(2, 2);
  C(0, 0) = 1.0;
  C(1, 0) = 0.5;
  const Eigen::MatrixXcd Y = Eigen::MatrixXcd::Ones(2, 1);
  Eigen::MatrixXcd W(2, 1);
  W << cd(0.2, 0), cd(0.3, -0.1);
  GampState st;
  gamp_step(C, C.cwiseAbs2(), Y, W, Eigen::MatrixXd::Ones(2, 1), 0.1, 1.0, st);
  CHECK(std::isinf(st.tau_w_in(1, 0)));
  CHECK(st.r_hat_w(1, 0) == W(1, 0));
}

TEST_CASE("bad input is reported") {
  GampState st;
  const Eigen::MatrixXcd C = Eigen::MatrixXcd::Ones(2, 3);
  CHECK_THROWS_AS(gamp_step(C, C.cwiseAbs2(), Eigen::MatrixXcd::Ones(3, 1), Eigen::MatrixXcd::Zero(3, 1),
                            Eigen::MatrixXd::Ones(3, 1), 0.1, 0.7, st),
                  std::invalid_argument);
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Ones(2, 1);
  Y(0, 0) = cd(std::numeric_limits<double>::quiet_NaN(), 0.0);
  GampState st2;
  CHECK_THROWS_AS(gamp_step(C, C.cwiseAbs2(), Y, Eigen::MatrixXcd::Zero(3, 1), Eigen::MatrixXd::Ones(3, 1),
                            0.1, 0.7, st2),
                  DivergenceError);
}

TEST_CASE("per-block driver runs every delay bin") {
  Rng rng(33);
  std::vector<SensingBlock> blocks(3);
  for (auto& b : blocks) {
    b.C_phi = Eigen::MatrixXcd(4, 5);
    b.Y = Eigen::MatrixXcd(4, 2);
    for (int i = 0; i < b.C_phi.size(); ++i) b.C_phi(i) = oracle::cnormal(rng, 0.25);
    for (int i = 0; i < b.Y.size(); ++i) b.Y(i) = oracle::cnormal(rng);
  }
  std::vector<GampState> st(3);
  std::vector<Eigen::MatrixXcd> w(3, Eigen::MatrixXcd::Zero(5, 2));
  std::vector<Eigen::MatrixXd> tw(3, Eigen::MatrixXd::Ones(5, 2));
  gamp_iteration(blocks, st, w, tw, 0.1, 0.7);
  for (std::size_t l = 0; l < 3; ++l) {
    GampState one;
    gamp_step(blocks[l].C_phi, blocks[l].C_phi.cwiseAbs2(), blocks[l].Y, w[l], tw[l], 0.1, 0.7, one);
    CHECK(one.r_hat_w == st[l].r_hat_w);
  }
  std::vector<GampState> short_state(2);
  CHECK_THROWS(gamp_iteration(blocks, short_state, w, tw, 0.1, 0.7));
}
