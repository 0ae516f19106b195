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
#include <limits>
#include <numbers>

#include "otfsra/receiver.hpp"

namespace otfsra {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

void normalize_log(double* v, int n) {
  const double z = log_sum_exp(v, n);
  for (int i = 0; i < n; ++i) v[i] -= z;
}

int device_of(std::size_t v, const FactorDims& d) { return int(v / (std::size_t(d.M) * d.N)); }

}  // namespace

double log_sum_exp(const double* v, std::size_t n) {
  double m = kNegInf;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

double log_cn(cd x, double var) { return -std::log(std::numbers::pi * var) - std::norm(x) / var; }

void mixture_loglik(cd r, double tau, const Mixture& mix, const std::vector<cd>& alphabet,
                    double* out) {
  const int K = int(mix.omega.size()), A = int(alphabet.size());
  constexpr double log_pi = 1.1447298858494002;
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < A; ++m) {
      const double var = tau + mix.eta[k] * std::norm(alphabet[m]);
      out[k * A + m] = -log_pi - std::log(var) - std::norm(r - mix.mu[k] * alphabet[m]) / var;
    }
}

double support_likelihood(cd r, double tau, const double* log_p_bwd, const Mixture& mix,
                          const std::vector<cd>& alphabet) {
  const int K = int(mix.omega.size()), A = int(alphabet.size());
  thread_local std::vector<double> t;
  t.resize(std::size_t(K) * A);
  mixture_loglik(r, tau, mix, alphabet, t.data());
  for (int k = 0; k < K; ++k) {
    const double lw = std::log(mix.omega[k]);
    for (int m = 0; m < A; ++m) t[k * A + m] += lw + log_p_bwd[m];
  }
  const double log_rho_a = log_sum_exp(t.data(), t.size());
  return sigmoid(log_rho_a - log_cn(r, tau));
}

BgmPosterior bgm_posterior(cd r, double tau, double zeta, const double* log_p_bwd,
                           const Mixture& mix, const std::vector<cd>& alphabet,
                           MixtureStats* stats) {
  const int K = int(mix.omega.size()), A = int(alphabet.size());
  BgmPosterior out;
  if (zeta <= 0.0) return out;
  thread_local std::vector<double> t;
  t.resize(std::size_t(K) * A);
  mixture_loglik(r, tau, mix, alphabet, t.data());
  for (int k = 0; k < K; ++k) {
    const double lw = std::log(mix.omega[k]);
    for (int m = 0; m < A; ++m) t[k * A + m] += lw + log_p_bwd[m];
  }
  const double log_rho_a = log_sum_exp(t.data(), t.size());
  out.chi = zeta >= 1.0 ? 1.0
                        : sigmoid(std::log(zeta) + log_rho_a - std::log1p(-zeta) - log_cn(r, tau));
  if (stats) stats->chi += out.chi;
  if (out.chi == 0.0 || log_rho_a == kNegInf) return out;

  cd w1 = 0.0, h1 = 0.0;
  double w2 = 0.0, h2 = 0.0;
  for (int k = 0; k < K; ++k) {
    const double eta = mix.eta[k];
    double sk0 = 0.0, sk2 = 0.0;
    cd sk1 = 0.0;
    for (int m = 0; m < A; ++m) {
      const double wb = std::exp(t[k * A + m] - log_rho_a);
      if (wb == 0.0) continue;
      const cd a = alphabet[m];
      const double a2 = std::norm(a);
      const double s = eta * a2;
      const double phi_w = s * tau / (s + tau);
      const cd theta_w = phi_w * (mix.mu[k] * a / s + r / tau);
      const double phi_h = eta * tau / (tau + s);
      const cd theta_h = phi_h * (mix.mu[k] / eta + r * std::conj(a) / tau);
      w1 += wb * theta_w;
      w2 += wb * (std::norm(theta_w) + phi_w);
      h1 += wb * theta_h;
      h2 += wb * (std::norm(theta_h) + phi_h);
      sk0 += wb;
      sk1 += wb * theta_h;
      sk2 += wb * (std::norm(theta_h) + phi_h);
    }
    if (stats) {
      stats->s0[k] += out.chi * sk0;
      stats->s1[k] += out.chi * sk1;
      stats->s2[k] += out.chi * sk2;
    }
  }
  out.w_mean = out.chi * w1;
  out.w_var = std::max(out.chi * w2 - std::norm(out.w_mean), 0.0);
  out.h_mean = out.chi * h1;
  out.h_var = std::max(out.chi * h2 - std::norm(out.h_mean), 0.0);
  return out;
}

SymbolBeliefs SymbolBeliefs::uniform(const FactorDims& d) {
  SymbolBeliefs b;
  const double lu = -std::log(double(d.A));
  b.log_p_fwd.assign(d.factors() * d.A, lu);
  b.log_p_bwd.assign(d.factors() * d.A, lu);
  b.p_post.assign(std::size_t(d.U) * d.M * d.A, 1.0 / d.A);
  return b;
}

std::vector<Eigen::ArrayXXd> compute_support_likelihood(const InputMessages& in,
                                                        const SymbolBeliefs& beliefs,
                                                        const Hyperparameters& hyper,
                                                        const std::vector<cd>& alphabet,
                                                        const FactorDims& d) {
  std::vector<Eigen::ArrayXXd> rho(d.M, Eigen::ArrayXXd::Constant(d.rows(), d.Na, kProbEps));
  for (int l = 0; l < d.M; ++l)
    for (int j = 0; j < d.Na; ++j)
      for (std::size_t v = 0; v < d.rows(); ++v) {
        const double tau = in.tau[l](v, j);
        if (!std::isfinite(tau)) continue;
        rho[l](v, j) = support_likelihood(in.r_hat[l](v, j), tau,
                                          &beliefs.log_p_bwd[d.id(l, v, j) * d.A],
                                          hyper.mix[device_of(v, d)], alphabet);
      }
  return rho;
}

void symbol_message_update(SymbolBeliefs& beliefs, const InputMessages& in,
                           const std::vector<Eigen::ArrayXXd>& zeta, const Hyperparameters& hyper,
                           const std::vector<cd>& alphabet, const FactorDims& d) {
  const int A = d.A;
  const int K = hyper.K;
  std::vector<double> t(std::size_t(K) * A), comp(K);
  const double lu = -std::log(double(A));
  for (int l = 0; l < d.M; ++l)
    for (std::size_t v = 0; v < d.rows(); ++v) {
      const auto& mix = hyper.mix[device_of(v, d)];
      for (int j = 0; j < d.Na; ++j) {
        double* f = &beliefs.log_p_fwd[d.id(l, v, j) * A];
        const double tau = in.tau[l](v, j);
        if (!std::isfinite(tau)) {
          std::fill(f, f + A, lu);
          continue;
        }
        const cd r = in.r_hat[l](v, j);
        const double z = zeta[l](v, j);
        mixture_loglik(r, tau, mix, alphabet, t.data());
        const double off = std::log1p(-z) + log_cn(r, tau);
        const double lz = std::log(z);
        for (int m = 0; m < A; ++m) {
          for (int k = 0; k < K; ++k) comp[k] = std::log(mix.omega[k]) + t[k * A + m];
          f[m] = log_add(off, lz + log_sum_exp(comp.data(), K));
        }
        normalize_log(f, A);
      }
    }

  // Total log-product per symbol over its M*N*Na factors, then leave-one-out.
  const std::size_t S = std::size_t(d.U) * d.M;
  std::vector<double> total(S * A, 0.0);
  for (int l = 0; l < d.M; ++l)
    for (std::size_t v = 0; v < d.rows(); ++v) {
      double* tot = &total[std::size_t(d.symbol_of(l, v)) * A];
      for (int j = 0; j < d.Na; ++j) {
        const double* f = &beliefs.log_p_fwd[d.id(l, v, j) * A];
        for (int m = 0; m < A; ++m) tot[m] += f[m];
      }
    }
  for (int l = 0; l < d.M; ++l)
    for (std::size_t v = 0; v < d.rows(); ++v) {
      const double* tot = &total[std::size_t(d.symbol_of(l, v)) * A];
      for (int j = 0; j < d.Na; ++j) {
        const std::size_t id = d.id(l, v, j) * A;
        for (int m = 0; m < A; ++m) beliefs.log_p_bwd[id + m] = tot[m] - beliefs.log_p_fwd[id + m];
        normalize_log(&beliefs.log_p_bwd[id], A);
      }
    }
  for (std::size_t s = 0; s < S; ++s) {
    double* tot = &total[s * A];
    normalize_log(tot, A);
    for (int m = 0; m < A; ++m) beliefs.p_post[s * A + m] = std::exp(tot[m]);
  }
}

void pin_symbol_beliefs(SymbolBeliefs& beliefs, const SymbolMatrix& symbols,
                        const std::vector<cd>& alphabet, const FactorDims& d) {
  std::vector<int> idx(std::size_t(d.U) * d.M);
  for (int u = 0; u < d.U; ++u)
    for (int s = 0; s < d.M; ++s) {
      int best = 0;
      for (int m = 1; m < d.A; ++m)
        if (std::abs(symbols(u, s) - alphabet[m]) < std::abs(symbols(u, s) - alphabet[best])) best = m;
      idx[u * d.M + s] = best;
    }
  for (int l = 0; l < d.M; ++l)
    for (std::size_t v = 0; v < d.rows(); ++v) {
      const int sym = d.symbol_of(l, v);
      for (int j = 0; j < d.Na; ++j) {
        double* b = &beliefs.log_p_bwd[d.id(l, v, j) * d.A];
        for (int m = 0; m < d.A; ++m) b[m] = m == idx[sym] ? 0.0 : kNegInf;
      }
    }
  for (std::size_t s = 0; s < idx.size(); ++s)
    for (int m = 0; m < d.A; ++m) beliefs.p_post[s * d.A + m] = m == idx[s] ? 1.0 : 0.0;
}

void posterior_moments(PosteriorOutputs& out, std::vector<MixtureStats>& stats,
                       const InputMessages& in, const std::vector<Eigen::ArrayXXd>& zeta,
                       const SymbolBeliefs& beliefs, const Hyperparameters& hyper,
                       const std::vector<cd>& alphabet, const FactorDims& d) {
  out.w_hat.assign(d.M, Eigen::MatrixXcd::Zero(d.rows(), d.Na));
  out.h_hat.assign(d.M, Eigen::MatrixXcd::Zero(d.rows(), d.Na));
  out.tau_w_post.assign(d.M, Eigen::MatrixXd::Zero(d.rows(), d.Na));
  out.tau_h_post.assign(d.M, Eigen::MatrixXd::Zero(d.rows(), d.Na));
  out.chi.assign(d.M, Eigen::MatrixXd::Zero(d.rows(), d.Na));
  stats.assign(d.U, MixtureStats(hyper.K));
  for (int l = 0; l < d.M; ++l)
    for (std::size_t v = 0; v < d.rows(); ++v) {
      const int u = device_of(v, d);
      for (int j = 0; j < d.Na; ++j) {
        const double tau = in.tau[l](v, j);
        if (!std::isfinite(tau)) continue;
        const auto p = bgm_posterior(in.r_hat[l](v, j), tau, zeta[l](v, j),
                                     &beliefs.log_p_bwd[d.id(l, v, j) * d.A], hyper.mix[u],
                                     alphabet, &stats[u]);
        out.chi[l](v, j) = p.chi;
        out.w_hat[l](v, j) = p.w_mean;
        out.tau_w_post[l](v, j) = p.w_var;
        out.h_hat[l](v, j) = p.h_mean;
        out.tau_h_post[l](v, j) = p.h_var;
      }
    }
  out.p_post = beliefs.p_post;
}

}  // namespace otfsra
