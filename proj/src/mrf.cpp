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

#include "otfsra/receiver.hpp"

namespace otfsra {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

double logit(double p) {
  p = clamp_prob(p);
  return std::log(p) - std::log1p(-p);
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

MrfState MrfState::uniform(const FactorDims& d) {
  MrfState s;
  s.xi_L = s.xi_R = s.xi_T = s.xi_B = Eigen::ArrayXXd::Constant(d.rows(), d.Na, 0.5);
  return s;
}

void mrf_pass(MrfState& mrf, const std::vector<Eigen::ArrayXXd>& rho, double alpha, double beta,
              int iterations, const FactorDims& d) {
  const auto R = Eigen::Index(d.rows());
  const int N = d.N, Na = d.Na;
  // Evidence a node sends regardless of direction: field plus all-l likelihoods.
  Eigen::ArrayXXd base = Eigen::ArrayXXd::Constant(R, Na, -2.0 * alpha);
  for (const auto& r : rho)
    for (Eigen::Index j = 0; j < Na; ++j)
      for (Eigen::Index v = 0; v < R; ++v) base(v, j) += logit(r(v, j));

  // Pairwise factor: message = 1/2 + tanh(beta) tanh(d/2) / 2 for sender log-odds d.
  const double tb = std::tanh(beta);
  auto send = [&](double dlog) { return clamp_prob(0.5 + 0.5 * tb * std::tanh(0.5 * dlog)); };

  for (int it = 0; it < iterations; ++it) {
    Eigen::ArrayXXd lL = mrf.xi_L.unaryExpr(&logit), lR = mrf.xi_R.unaryExpr(&logit),
                    lT = mrf.xi_T.unaryExpr(&logit), lB = mrf.xi_B.unaryExpr(&logit);
    MrfState next = mrf;
    for (Eigen::Index v = 0; v < R; ++v) {
      const int i = int(v % N);
      for (int j = 0; j < Na; ++j) {
        next.xi_L(v, j) = j > 0 ? send(base(v, j - 1) + lL(v, j - 1) + lT(v, j - 1) + lB(v, j - 1)) : 0.5;
        next.xi_R(v, j) =
            j < Na - 1 ? send(base(v, j + 1) + lR(v, j + 1) + lT(v, j + 1) + lB(v, j + 1)) : 0.5;
        next.xi_T(v, j) = i > 0 ? send(base(v - 1, j) + lT(v - 1, j) + lL(v - 1, j) + lR(v - 1, j)) : 0.5;
        next.xi_B(v, j) =
            i < N - 1 ? send(base(v + 1, j) + lB(v + 1, j) + lL(v + 1, j) + lR(v + 1, j)) : 0.5;
      }
    }
    mrf = std::move(next);
  }
}

std::vector<Eigen::ArrayXXd> compute_zeta(const MrfState& mrf, const std::vector<Eigen::ArrayXXd>& rho,
                                          double alpha, const FactorDims& d) {
  const auto R = Eigen::Index(d.rows());
  std::vector<Eigen::ArrayXXd> zeta(d.M, Eigen::ArrayXXd(R, d.Na));
  std::vector<double> lr(d.M);
  for (int j = 0; j < d.Na; ++j)
    for (Eigen::Index v = 0; v < R; ++v) {
      const double neigh = logit(mrf.xi_L(v, j)) + logit(mrf.xi_R(v, j)) + logit(mrf.xi_T(v, j)) +
                           logit(mrf.xi_B(v, j));
      for (int l = 0; l < d.M; ++l) lr[l] = logit(rho[l](v, j));
      for (int l = 0; l < d.M; ++l) {
        double others = 0.0;
        for (int m = 0; m < d.M; ++m)
          if (m != l) others += lr[m];
        zeta[l](v, j) = clamp_prob(sigmoid(-2.0 * alpha + others + neigh));
      }
    }
  return zeta;
}

}  // namespace otfsra
