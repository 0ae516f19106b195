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

#include "otfsra/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace otfsra {

namespace {

double mean_symbol_power(const std::vector<cd>& a) {
  double s = 0.0;
  for (const auto& v : a) s += std::norm(v);
  return s / double(a.size());
}

double initial_sparsity(const SystemConfig& cfg) {
  return std::clamp(cfg.p_lambda * cfg.P / (double(cfg.M) * cfg.N), 1e-3, 0.5);
}

}  // namespace

std::vector<double> device_energy(const std::vector<Eigen::MatrixXcd>& w_hat, const FactorDims& d) {
  std::vector<double> e(d.U, 0.0);
  const std::size_t per = std::size_t(d.M) * d.N;
  for (const auto& W : w_hat)
    for (int u = 0; u < d.U; ++u) e[u] += W.middleRows(u * per, per).squaredNorm();
  return e;
}

double activity_threshold(const std::vector<double>& energy, const ThresholdPolicy& policy,
                          double nominal_energy) {
  if (policy.kind == ThresholdPolicy::Kind::Absolute) return policy.value;
  const double peak = energy.empty() ? 0.0 : *std::max_element(energy.begin(), energy.end());
  return std::max(policy.value * peak, policy.floor * nominal_energy);
}

std::vector<int> detect_activity(const std::vector<Eigen::MatrixXcd>& w_hat,
                                 const ThresholdPolicy& policy, double nominal_energy,
                                 const FactorDims& d) {
  const auto e = device_energy(w_hat, d);
  const double T = activity_threshold(e, policy, nominal_energy);
  std::vector<int> act(d.U);
  for (int u = 0; u < d.U; ++u) act[u] = e[u] > T ? 1 : 0;
  return act;
}

std::vector<int> detect_symbols(const std::vector<double>& p_post, int A) {
  std::vector<int> idx(p_post.size() / A);
  for (std::size_t s = 0; s < idx.size(); ++s) {
    int best = 0;
    for (int m = 1; m < A; ++m)
      if (p_post[s * A + m] > p_post[s * A + best]) best = m;
    idx[s] = best;
  }
  return idx;
}

Hyperparameters initial_hyperparameters(const std::vector<Eigen::MatrixXcd>& Y,
                                        const std::vector<Eigen::MatrixXcd>& C,
                                        const SystemConfig& cfg, const AlgoConfig& algo) {
  double ey = 0.0, ec = 0.0, count = 0.0;
  for (const auto& y : Y) {
    ey += y.squaredNorm();
    count += double(y.size());
  }
  for (const auto& c : C) ec += c.squaredNorm();
  Hyperparameters h;
  h.K = algo.K;
  h.alpha = algo.alpha;
  h.beta = algo.beta;
  // 0 dB guess: half the received power is noise.
  h.sigma2 = ey > 0.0 ? ey / (2.0 * count) : 1e-12;
  const double zeta0 = initial_sparsity(cfg);
  double eta0 = 0.5 * ey / (cfg.Na() * zeta0 * mean_symbol_power(cfg.symbols()) * ec);
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) eta0 = 1.0;
  Mixture mix;
  for (int k = 1; k <= algo.K; ++k) {
    mix.omega.push_back(1.0 / algo.K);
    mix.mu.push_back(0.0);
    mix.eta.push_back(eta0 * 2.0 * k / (algo.K + 1));
  }
  h.mix.assign(cfg.U, mix);
  return h;
}

ReceiverResult run_receiver(const std::vector<SensingBlock>& blocks, const SpreadingCodeSet& codes,
                            const SystemConfig& cfg, const AlgoConfig& algo,
                            const ReceiverExtras& extras) {
  const FactorDims d = FactorDims::of(cfg);
  const int M = cfg.M, N = cfg.N, Q = cfg.Q;
  if (int(blocks.size()) != M) throw std::invalid_argument("run_receiver: expected M sensing blocks");
  for (const auto& b : blocks)
    if (b.Y.rows() != Q * N || b.Y.cols() != d.Na)
      throw std::invalid_argument("run_receiver: received block must be QN x Na");
  const auto& alphabet = cfg.symbols();
  const double ea2 = mean_symbol_power(alphabet);

  std::vector<Eigen::MatrixXcd> Y(M), C_plain(M);
  const Eigen::MatrixXcd ones = Eigen::MatrixXcd::Ones(Q, cfg.U * M);
  for (int l = 0; l < M; ++l) {
    Y[l] = blocks[l].Y;
    C_plain[l] = build_sensing_matrix(codes, ones, l, cfg);
  }
  double y_power = 0.0;
  for (const auto& y : Y) y_power += y.squaredNorm();
  const double sigma2_floor = std::max(1e-12 * y_power / (double(Q) * M * N * d.Na), 1e-300);

  ReceiverResult res;
  res.hyper = initial_hyperparameters(Y, C_plain, cfg, algo);
  res.phi = unit_phase_rotation(cfg);
  const bool learn_phi = em_phi_enabled(cfg, algo);
  const int P_bar = resolved_p_bar(cfg, algo);

  std::vector<SensingBlock> work(M);
  for (int l = 0; l < M; ++l) {
    work[l].l = l;
    work[l].Y = Y[l];
    work[l].C_phi = C_plain[l];
  }
  std::vector<Eigen::MatrixXd> C2(M);
  for (int l = 0; l < M; ++l) C2[l] = work[l].C_phi.cwiseAbs2();

  const double tau0 = initial_sparsity(cfg) * ea2 *
                      [&] {
                        double s = 0.0;
                        for (int k = 0; k < algo.K; ++k) s += res.hyper.mix[0].omega[k] * res.hyper.mix[0].eta[k];
                        return s;
                      }();
  std::vector<Eigen::MatrixXcd> w_hat(M, Eigen::MatrixXcd::Zero(d.rows(), d.Na));
  std::vector<Eigen::MatrixXd> tau_w(M, Eigen::MatrixXd::Constant(d.rows(), d.Na, tau0));
  std::vector<GampState> gamp(M);
  MrfState mrf = MrfState::uniform(d);
  SymbolBeliefs beliefs = SymbolBeliefs::uniform(d);
  const bool genie = extras.genie_symbols != nullptr;
  if (genie) pin_symbol_beliefs(beliefs, *extras.genie_symbols, alphabet, d);

  PosteriorOutputs post;
  post.w_hat.assign(M, Eigen::MatrixXcd::Zero(d.rows(), d.Na));
  post.h_hat = post.w_hat;
  post.tau_w_post.assign(M, Eigen::MatrixXd::Zero(d.rows(), d.Na));
  post.tau_h_post = post.tau_w_post;
  post.chi = post.tau_w_post;
  post.p_post = beliefs.p_post;
  PosteriorOutputs prev = post, best = post;
  best.p_post = beliefs.p_post;
  double best_resid = std::numeric_limits<double>::infinity();
  std::vector<MixtureStats> stats;
  InputMessages in;
  in.r_hat.resize(M);
  in.tau.resize(M);

  double truth_energy = 0.0;
  if (extras.truth_H)
    for (const auto& h : *extras.truth_H) truth_energy += h.squaredNorm();
  double ynorm = 0.0;
  for (const auto& y : Y) ynorm += y.squaredNorm();

  // A residual this far above the data energy means the iteration has left
  // any useful fixed point.
  constexpr double kBlowUp = 1e3;

  for (int t = 1; t <= algo.I_out; ++t) {
    IterationDiag diag;
    diag.iter = t;
    double resid = 0.0;
    try {
      for (int l = 0; l < M; ++l)
        gamp_step(work[l].C_phi, C2[l], Y[l], w_hat[l], tau_w[l], res.hyper.sigma2, algo.damping,
                  gamp[l]);
      for (int l = 0; l < M; ++l) {
        in.r_hat[l] = gamp[l].r_hat_w;
        in.tau[l] = gamp[l].tau_w_in;
      }
      const auto rho = compute_support_likelihood(in, beliefs, res.hyper, alphabet, d);
      mrf_pass(mrf, rho, res.hyper.alpha, res.hyper.beta, algo.I_mrf, d);
      const auto zeta = compute_zeta(mrf, rho, res.hyper.alpha, d);
      if (!genie) symbol_message_update(beliefs, in, zeta, res.hyper, alphabet, d);
      posterior_moments(post, stats, in, zeta, beliefs, res.hyper, alphabet, d);
      for (int l = 0; l < M; ++l) {
        if (!post.w_hat[l].allFinite() || !post.h_hat[l].allFinite() ||
            !post.tau_w_post[l].allFinite())
          throw DivergenceError("posterior moments are non-finite");
        resid += (Y[l] - work[l].C_phi * post.w_hat[l]).squaredNorm();
      }
      resid = ynorm > 0.0 ? resid / ynorm : 0.0;
      if (!std::isfinite(resid) || resid > kBlowUp) throw DivergenceError("residual blew up");
    } catch (const DivergenceError&) {
      res.diverged = true;
      break;
    }

    double change = 0.0, norm = 0.0;
    for (int l = 0; l < M; ++l) {
      change += (post.h_hat[l] - prev.h_hat[l]).squaredNorm();
      norm += post.h_hat[l].squaredNorm();
    }
    diag.nmse_proxy = norm > 0.0 ? change / norm : 0.0;
    diag.residual = resid;
    diag.sigma2 = res.hyper.sigma2;
    if (extras.truth_H && truth_energy > 0.0) {
      double err = 0.0;
      for (int l = 0; l < M; ++l) err += ((*extras.truth_H)[l] - post.h_hat[l]).squaredNorm();
      diag.nmse = err / truth_energy;
    }
    // The stopping rule is armed once EM learning has had one update.
    diag.converged = t > algo.em_warmup + 1 && change <= algo.T_out * norm;
    prev = post;
    if (resid <= best_resid) {
      best_resid = resid;
      best = post;
      best.p_post = beliefs.p_post;
    }
    res.iterations = t;
    res.diagnostics.push_back(diag);
    if (extras.on_iteration) extras.on_iteration(diag);
    w_hat = post.w_hat;
    tau_w = post.tau_w_post;
    if (diag.converged) {
      res.converged = true;
      break;
    }

    if (t > algo.em_warmup) {
      if (learn_phi) {
        if (auto upd = em_update_phi(post.w_hat, post.tau_w_post, Y, C_plain, res.hyper.sigma2,
                                     P_bar, cfg)) {
          res.phi = std::move(*upd);
          for (int l = 0; l < M; ++l) {
            for (int c = 0; c < cfg.U * M; ++c)
              for (int q = 0; q < Q; ++q)
                work[l].C_phi.block(q * N, std::size_t(c) * N, N, N) =
                    C_plain[l].block(q * N, std::size_t(c) * N, N, N) * res.phi.phi(q, c);
            C2[l] = work[l].C_phi.cwiseAbs2();
          }
        }
      }
      if (algo.em_hyper) {
        em_update_hyper(res.hyper, gamp, Y, stats);
        res.hyper.sigma2 = std::max(res.hyper.sigma2, sigma2_floor);
      }
    }
  }

  if (res.diverged) {
    post = std::move(best);
  } else {
    post.p_post = beliefs.p_post;
  }
  res.post = std::move(post);
  auto& out = res.post;
  out.activity_hat = detect_activity(out.w_hat, algo.threshold, double(M) * d.Na * ea2, d);
  const auto idx = detect_symbols(out.p_post, d.A);
  out.symbols_hat = SymbolMatrix::Zero(cfg.U, M);
  out.symbol_index = Eigen::MatrixXi::Constant(cfg.U, M, -1);
  const std::size_t per = std::size_t(M) * N;
  for (int u = 0; u < cfg.U; ++u) {
    if (out.activity_hat[u]) {
      for (int s = 0; s < M; ++s) {
        out.symbol_index(u, s) = idx[u * M + s];
        out.symbols_hat(u, s) = alphabet[idx[u * M + s]];
      }
    } else {
      for (int l = 0; l < M; ++l) {
        out.h_hat[l].middleRows(u * per, per).setZero();
        out.tau_h_post[l].middleRows(u * per, per).setZero();
      }
    }
  }
  return res;
}

}  // namespace otfsra
