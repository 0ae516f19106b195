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

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "otfsra/config.hpp"
#include "otfsra/modem.hpp"

namespace otfsra {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Mixture {
  std::vector<double> omega;
  std::vector<cd> mu;
  std::vector<double> eta;
};

struct Hyperparameters {
  double sigma2 = 1.0;
  std::vector<Mixture> mix;  // one per device
  double alpha = 0.4;
  double beta = 0.4;
  int K = 1;
};

// Index helper for the factor grid (l, v, j) with v = u*M*N + l'*N + i.
struct FactorDims {
  int U = 0, M = 0, N = 0, Na = 0, A = 0;

  static FactorDims of(const SystemConfig& cfg) {
    return {cfg.U, cfg.M, cfg.N, cfg.Na(), int(cfg.symbols().size())};
  }
  std::size_t rows() const { return std::size_t(U) * M * N; }
  std::size_t factors() const { return std::size_t(M) * rows() * Na; }
  // Flattened factor id for (l, v, j).
  std::size_t id(int l, std::size_t v, int j) const { return (std::size_t(l) * rows() + v) * Na + j; }
  // Symbol index u*M + s carried by row v in delay bin l.
  int symbol_of(int l, std::size_t v) const {
    const int u = int(v / (std::size_t(M) * N));
    const int lp = int(v / N) % M;
    return u * M + ((l - lp) % M + M) % M;
  }
};

// ---------------------------------------------------------------- GAMP

struct GampState {
  Eigen::MatrixXcd p_hat, r_hat, g_hat, r_hat_w;
  Eigen::MatrixXd tau_p, tau_r, tau_g, tau_w_in;
  bool started = false;
};

// One pass of the linear module for one delay bin. Columns of C with zero
// energy get tau_w_in = +inf and r_hat_w = w_hat.
void gamp_step(const Eigen::MatrixXcd& C, const Eigen::MatrixXd& C_abs2, const Eigen::MatrixXcd& Y,
               const Eigen::MatrixXcd& w_hat, const Eigen::MatrixXd& tau_w, double sigma2,
               double damping, GampState& st);

void gamp_iteration(const std::vector<SensingBlock>& blocks, std::vector<GampState>& state,
                    const std::vector<Eigen::MatrixXcd>& w_hat,
                    const std::vector<Eigen::MatrixXd>& tau_w, double sigma2, double damping);

// ---------------------------------------------------------------- scalar kernels

double log_sum_exp(const double* v, std::size_t n);

// log CN(x | 0, var)
double log_cn(cd x, double var);

// Per-factor log CN(0 | r - mu_k a_m, tau + eta_k |a_m|^2), laid out [k * A + m].
void mixture_loglik(cd r, double tau, const Mixture& mix, const std::vector<cd>& alphabet,
                    double* out);

// rho = rhoA / (CN(0|r,tau) + rhoA), with p_bwd given as log-probabilities.
double support_likelihood(cd r, double tau, const double* log_p_bwd, const Mixture& mix,
                          const std::vector<cd>& alphabet);

struct MixtureStats {
  // Per component: sum chi*w, sum chi*w*theta, sum chi*w*(|theta|^2 + phi).
  std::vector<double> s0, s2;
  std::vector<cd> s1;
  double chi = 0.0;

  explicit MixtureStats(int K = 0) : s0(K, 0.0), s2(K, 0.0), s1(K, 0.0) {}
};

struct BgmPosterior {
  double chi = 0.0;
  cd w_mean;
  double w_var = 0.0;
  cd h_mean;
  double h_var = 0.0;
};

BgmPosterior bgm_posterior(cd r, double tau, double zeta, const double* log_p_bwd,
                           const Mixture& mix, const std::vector<cd>& alphabet,
                           MixtureStats* stats = nullptr);

// ---------------------------------------------------------------- MRF

struct MrfState {
  // Directional messages, each UMN x Na. L/R run along the angle index j,
  // T/B along the Doppler row i inside one (u, l') grid.
  Eigen::ArrayXXd xi_L, xi_R, xi_T, xi_B;

  static MrfState uniform(const FactorDims& d);
};

constexpr double kProbEps = 1e-12;

void mrf_pass(MrfState& mrf, const std::vector<Eigen::ArrayXXd>& rho, double alpha, double beta,
              int iterations, const FactorDims& d);
std::vector<Eigen::ArrayXXd> compute_zeta(const MrfState& mrf, const std::vector<Eigen::ArrayXXd>& rho,
                                          double alpha, const FactorDims& d);

// ---------------------------------------------------------------- symbol messages

struct SymbolBeliefs {
  // Log-probabilities, factor-major: [id(l, v, j) * A + m].
  std::vector<double> log_p_fwd, log_p_bwd;
  // Probabilities per symbol: [(u*M + s) * A + m].
  std::vector<double> p_post;

  static SymbolBeliefs uniform(const FactorDims& d);
};

// Per-l input-side messages consumed by the nonlinear module.
struct InputMessages {
  std::vector<Eigen::MatrixXcd> r_hat;
  std::vector<Eigen::MatrixXd> tau;
};

std::vector<Eigen::ArrayXXd> compute_support_likelihood(const InputMessages& in,
                                                        const SymbolBeliefs& beliefs,
                                                        const Hyperparameters& hyper,
                                                        const std::vector<cd>& alphabet,
                                                        const FactorDims& d);

void symbol_message_update(SymbolBeliefs& beliefs, const InputMessages& in,
                           const std::vector<Eigen::ArrayXXd>& zeta, const Hyperparameters& hyper,
                           const std::vector<cd>& alphabet, const FactorDims& d);

// Pins p_bwd and p_post to delta beliefs at the given symbols.
void pin_symbol_beliefs(SymbolBeliefs& beliefs, const SymbolMatrix& symbols,
                        const std::vector<cd>& alphabet, const FactorDims& d);

struct PosteriorOutputs {
  std::vector<Eigen::MatrixXcd> w_hat, h_hat;
  std::vector<Eigen::MatrixXd> tau_w_post, tau_h_post, chi;
  std::vector<int> activity_hat;
  SymbolMatrix symbols_hat;
  Eigen::MatrixXi symbol_index;  // U x M, -1 where the device is declared inactive
  std::vector<double> p_post;
};

// Fills w/h moments and chi; accumulates per-device mixture statistics.
void posterior_moments(PosteriorOutputs& out, std::vector<MixtureStats>& stats,
                       const InputMessages& in, const std::vector<Eigen::ArrayXXd>& zeta,
                       const SymbolBeliefs& beliefs, const Hyperparameters& hyper,
                       const std::vector<cd>& alphabet, const FactorDims& d);

// ---------------------------------------------------------------- EM

// Returns nullopt when the truncated system is singular.
std::optional<PhaseRotationSet> em_update_phi(const std::vector<Eigen::MatrixXcd>& w_hat,
                                              const std::vector<Eigen::MatrixXd>& tau_w_post,
                                              const std::vector<Eigen::MatrixXcd>& Y,
                                              const std::vector<Eigen::MatrixXcd>& C_plain,
                                              double sigma2, int P_bar, const SystemConfig& cfg);

std::optional<PhaseRotationSet> em_update_phi(const std::vector<Eigen::MatrixXcd>& w_hat,
                                              const std::vector<Eigen::MatrixXd>& tau_w_post,
                                              const std::vector<Eigen::MatrixXcd>& Y,
                                              const SpreadingCodeSet& codes, double sigma2,
                                              int P_bar, const SystemConfig& cfg);

// Noise update from the output-side posteriors (r_hat, tau_r).
double em_noise_variance(const std::vector<GampState>& gamp, const std::vector<Eigen::MatrixXcd>& Y);

constexpr double kEmEps = 1e-12;

// Mixture update; components with empty responsibility keep their values.
void em_update_mixture(Mixture& mix, const MixtureStats& stats);

void em_update_hyper(Hyperparameters& hyper, const std::vector<GampState>& gamp,
                     const std::vector<Eigen::MatrixXcd>& Y, const std::vector<MixtureStats>& stats);

// ---------------------------------------------------------------- detectors

std::vector<double> device_energy(const std::vector<Eigen::MatrixXcd>& w_hat, const FactorDims& d);
double activity_threshold(const std::vector<double>& energy, const ThresholdPolicy& policy,
                          double nominal_energy);
std::vector<int> detect_activity(const std::vector<Eigen::MatrixXcd>& w_hat,
                                 const ThresholdPolicy& policy, double nominal_energy,
                                 const FactorDims& d);
// Index of the MAP symbol for each of the U*M symbols; ties go to the lowest index.
std::vector<int> detect_symbols(const std::vector<double>& p_post, int A);

// ---------------------------------------------------------------- driver

struct IterationDiag {
  int iter = 0;
  double nmse_proxy = 0.0;  // relative change of the channel estimate
  double residual = 0.0;    // sum ||Y - C W_hat||^2 / sum ||Y||^2
  double sigma2 = 0.0;
  bool converged = false;
  double nmse = -1.0;       // against the true channel, when supplied
};

struct ReceiverExtras {
  const SymbolMatrix* genie_symbols = nullptr;
  const std::vector<Eigen::MatrixXcd>* truth_H = nullptr;
  std::function<void(const IterationDiag&)> on_iteration;
};

struct ReceiverResult {
  PosteriorOutputs post;
  Hyperparameters hyper;
  PhaseRotationSet phi;
  std::vector<IterationDiag> diagnostics;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
};

Hyperparameters initial_hyperparameters(const std::vector<Eigen::MatrixXcd>& Y,
                                        const std::vector<Eigen::MatrixXcd>& C,
                                        const SystemConfig& cfg, const AlgoConfig& algo);

ReceiverResult run_receiver(const std::vector<SensingBlock>& blocks, const SpreadingCodeSet& codes,
                            const SystemConfig& cfg, const AlgoConfig& algo,
                            const ReceiverExtras& extras = {});

}  // namespace otfsra
