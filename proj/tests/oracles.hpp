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

// Independent reference computations shared by the unit and acceptance suites.
// Nothing here calls into the code paths it checks except for the entry point
// under test.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "otfsra/modem.hpp"
#include "otfsra/receiver.hpp"

namespace otfsra::oracle {

inline cd cnormal(Rng& rng, double var = 1.0) {
  std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
  const double re = g(rng);
  const double im = g(rng);
  return {re, im};
}

inline double cn_pdf(cd x, cd mean, double var) {
  return std::exp(-std::norm(x - mean) / var) / (std::numbers::pi * var);
}

// ---------------------------------------------------------------- GAMP vs LMMSE

struct LmmseCase {
  double rel_error = 0.0;
  int iterations = 0;
};

// Gaussian prior CN(0, v) on every entry, so the GAMP fixed point mean is the
// linear MMSE estimate v C^H (v C C^H + s2 I)^-1 y.
inline LmmseCase gamp_vs_lmmse(std::uint64_t seed, int rows = 24, int cols = 32) {
  Rng rng(seed);
  const double v = 1.0, s2 = 0.05;
  Eigen::MatrixXcd C(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) C(r, c) = cnormal(rng, 1.0 / rows);
  Eigen::VectorXcd w(cols), y(rows);
  for (int c = 0; c < cols; ++c) w(c) = cnormal(rng, v);
  y = C * w;
  for (int r = 0; r < rows; ++r) y(r) += cnormal(rng, s2);

  const Eigen::MatrixXd C2 = C.cwiseAbs2();
  Eigen::MatrixXcd w_hat = Eigen::MatrixXcd::Zero(cols, 1);
  Eigen::MatrixXd tau_w = Eigen::MatrixXd::Constant(cols, 1, v);
  GampState st;
  LmmseCase out;
  for (int it = 1; it <= 5000; ++it) {
    gamp_step(C, C2, y, w_hat, tau_w, s2, 0.7, st);
    Eigen::MatrixXcd next(cols, 1);
    for (int c = 0; c < cols; ++c) {
      const double t = st.tau_w_in(c, 0);
      next(c, 0) = v / (v + t) * st.r_hat_w(c, 0);
      tau_w(c, 0) = v * t / (v + t);
    }
    const double change = (next - w_hat).norm();
    w_hat = next;
    out.iterations = it;
    if (change <= 1e-14 * w_hat.norm()) break;
  }
  const Eigen::MatrixXcd K = v * C * C.adjoint() + s2 * Eigen::MatrixXcd::Identity(rows, rows);
  const Eigen::VectorXcd lmmse = v * C.adjoint() * K.fullPivLu().solve(y);
  out.rel_error = (w_hat.col(0) - lmmse).norm() / lmmse.norm();
  return out;
}

// ---------------------------------------------------------------- BGM quadrature

struct BgmDraw {
  cd r;
  double tau = 1.0;
  double zeta = 0.5;
  Mixture mix;
  std::vector<cd> alphabet;
  std::vector<double> log_p;
};

inline BgmDraw random_bgm_draw(Rng& rng) {
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  BgmDraw d;
  d.r = cnormal(rng, 2.0);
  d.tau = 0.05 + 0.95 * U01(rng);
  d.zeta = 0.1 + 0.8 * U01(rng);
  const int K = 1 + int(U01(rng) * 3.0);
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    d.mix.omega.push_back(0.2 + U01(rng));
    total += d.mix.omega.back();
    d.mix.mu.push_back(cnormal(rng, 0.5));
    d.mix.eta.push_back(0.2 + 1.8 * U01(rng));
  }
  for (auto& w : d.mix.omega) w /= total;
  if (U01(rng) < 0.5) {
    d.alphabet = npam_alphabet(4);
  } else {
    const int A = 2 + int(U01(rng) * 3.0);
    for (int m = 0; m < A; ++m)
      d.alphabet.push_back(std::polar(0.5 + U01(rng), 2.0 * std::numbers::pi * U01(rng)));
  }
  double z = 0.0;
  std::vector<double> p;
  for (std::size_t m = 0; m < d.alphabet.size(); ++m) {
    p.push_back(0.05 + U01(rng));
    z += p.back();
  }
  for (double x : p) d.log_p.push_back(std::log(x / z));
  return d;
}

struct BgmMoments {
  double chi = 0.0;
  cd w_mean, h_mean;
  double w_var = 0.0, h_var = 0.0;
  double w_power = 0.0, h_power = 0.0;
};

// Trapezoid rule on a uniform 2D grid; the integrands are Gaussian mixtures so
// the rule converges spectrally once the spacing is a fraction of the narrowest
// component width.
inline BgmMoments bgm_quadrature(const BgmDraw& d) {
  const int K = int(d.mix.omega.size()), A = int(d.alphabet.size());
  struct Comp {
    double weight;
    cd mu;
    double eta;
    cd a;
  };
  std::vector<Comp> comps;
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < A; ++m)
      comps.push_back({d.mix.omega[k] * std::exp(d.log_p[m]), d.mix.mu[k], d.mix.eta[k], d.alphabet[m]});

  // Integrate f(x) = sum_c weight * lik(x) * prior(x) and its first two moments.
  auto integrate = [&](auto density, cd center_lo, cd center_hi, double narrow, double wide) {
    const double h = narrow / 2.5;
    const double pad = 10.0 * wide;
    const double x0 = std::min(center_lo.real(), center_hi.real()) - pad;
    const double x1 = std::max(center_lo.real(), center_hi.real()) + pad;
    const double y0 = std::min(center_lo.imag(), center_hi.imag()) - pad;
    const double y1 = std::max(center_lo.imag(), center_hi.imag()) + pad;
    const int nx = int(std::ceil((x1 - x0) / h)), ny = int(std::ceil((y1 - y0) / h));
    double m0 = 0.0, m2 = 0.0;
    cd m1 = 0.0;
    for (int ix = 0; ix <= nx; ++ix)
      for (int iy = 0; iy <= ny; ++iy) {
        const cd x(x0 + ix * h, y0 + iy * h);
        const double f = density(x);
        m0 += f;
        m1 += f * x;
        m2 += f * std::norm(x);
      }
    const double cell = h * h;
    return std::make_tuple(m0 * cell, m1 * cell, m2 * cell);
  };

  // Bounding boxes from the per-component Gaussian posteriors.
  cd wlo(1e300, 1e300), whi(-1e300, -1e300), hlo = wlo, hhi = whi;
  double wmin = 1e300, hmin = 1e300, wmax = 0.0, hmax = 0.0;
  auto grow = [](cd& lo, cd& hi, cd c) {
    lo = {std::min(lo.real(), c.real()), std::min(lo.imag(), c.imag())};
    hi = {std::max(hi.real(), c.real()), std::max(hi.imag(), c.imag())};
  };
  for (const auto& c : comps) {
    const double s = c.eta * std::norm(c.a);
    const double vw = s * d.tau / (s + d.tau);
    grow(wlo, whi, vw * (c.mu * c.a / s + d.r / d.tau));
    wmin = std::min(wmin, std::sqrt(vw / 2.0));
    wmax = std::max(wmax, std::sqrt(vw / 2.0));
    const double vh = 1.0 / (1.0 / c.eta + std::norm(c.a) / d.tau);
    grow(hlo, hhi, vh * (c.mu / c.eta + d.r * std::conj(c.a) / d.tau));
    hmin = std::min(hmin, std::sqrt(vh / 2.0));
    hmax = std::max(hmax, std::sqrt(vh / 2.0));
  }

  auto w_density = [&](cd w) {
    double prior = 0.0;
    for (const auto& c : comps) prior += c.weight * cn_pdf(w, c.mu * c.a, c.eta * std::norm(c.a));
    return cn_pdf(d.r, w, d.tau) * prior;
  };
  auto h_density = [&](cd h) {
    double f = 0.0;
    for (const auto& c : comps) f += c.weight * cn_pdf(d.r, c.a * h, d.tau) * cn_pdf(h, c.mu, c.eta);
    return f;
  };
  auto [w0, w1, w2] = integrate(w_density, wlo, whi, wmin, wmax);
  auto [h0, h1, h2] = integrate(h_density, hlo, hhi, hmin, hmax);

  const double off = (1.0 - d.zeta) * cn_pdf(d.r, 0.0, d.tau);
  BgmMoments out;
  const double on_w = d.zeta * w0;
  out.chi = on_w / (on_w + off);
  out.w_mean = d.zeta * w1 / (on_w + off);
  out.w_power = d.zeta * w2 / (on_w + off);
  out.w_var = out.w_power - std::norm(out.w_mean);
  const double on_h = d.zeta * h0;
  out.h_mean = d.zeta * h1 / (on_h + off);
  out.h_power = d.zeta * h2 / (on_h + off);
  out.h_var = out.h_power - std::norm(out.h_mean);
  return out;
}

// Largest relative deviation of the closed-form moments from quadrature.
// Means are compared relative to the posterior RMS so near-zero means do not
// inflate the ratio.
inline double bgm_rel_error(const BgmDraw& d) {
  const auto q = bgm_quadrature(d);
  const auto p = bgm_posterior(d.r, d.tau, d.zeta, d.log_p.data(), d.mix, d.alphabet);
  double e = std::abs(p.chi - q.chi) / q.chi;
  e = std::max(e, std::abs(p.w_mean - q.w_mean) / std::sqrt(q.w_power));
  e = std::max(e, std::abs(p.w_var - q.w_var) / q.w_var);
  e = std::max(e, std::abs(p.h_mean - q.h_mean) / std::sqrt(q.h_power));
  e = std::max(e, std::abs(p.h_var - q.h_var) / q.h_var);
  return e;
}

// ---------------------------------------------------------------- MRF

inline std::vector<Eigen::ArrayXXd> random_rho(const FactorDims& d, Rng& rng) {
  std::uniform_real_distribution<double> U(0.001, 0.999);
  std::vector<Eigen::ArrayXXd> rho(d.M, Eigen::ArrayXXd(d.rows(), d.Na));
  for (auto& r : rho) r = r.unaryExpr([&](double) { return U(rng); });
  return rho;
}

// Max |xi - 0.5| after a pass with alpha = beta = 0.
inline double mrf_zero_coupling_deviation(std::uint64_t seed) {
  Rng rng(seed);
  const FactorDims d{3, 4, 4, 4, 4};
  const auto rho = random_rho(d, rng);
  MrfState s = MrfState::uniform(d);
  mrf_pass(s, rho, 0.0, 0.0, 7, d);
  double dev = 0.0;
  for (const auto* x : {&s.xi_L, &s.xi_R, &s.xi_T, &s.xi_B})
    dev = std::max(dev, (*x - 0.5).abs().maxCoeff());
  return dev;
}

// Single-site grid: zeta = 1 / (1 + e^{2 alpha} prod_{m != l} (1 - rho_m) / rho_m).
inline double mrf_single_site_error(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> U(0.05, 0.95);
  const FactorDims d{1, 5, 1, 1, 4};
  const auto rho = random_rho(d, rng);
  const double alpha = U(rng), beta = U(rng);
  MrfState s = MrfState::uniform(d);
  mrf_pass(s, rho, alpha, beta, 5, d);
  const auto zeta = compute_zeta(s, rho, alpha, d);
  double err = 0.0;
  for (std::size_t v = 0; v < d.rows(); ++v)
    for (int l = 0; l < d.M; ++l) {
      double odds = std::exp(2.0 * alpha);
      for (int m = 0; m < d.M; ++m)
        if (m != l) odds *= (1.0 - rho[m](v, 0)) / rho[m](v, 0);
      const double hand = 1.0 / (1.0 + odds);
      err = std::max(err, std::abs(zeta[l](v, 0) - hand) / hand);
    }
  return err;
}

// ---------------------------------------------------------------- EM-phi

// One supported tap with fractional Doppler offset k_frac; W and the
// observations are exact, so the M-step should return e^{j 2 pi k_frac q}.
inline double em_phi_phase_error(std::uint64_t seed, double k_frac, int Q) {
  Rng rng(seed);
  SystemConfig cfg;
  cfg.U = 2;
  cfg.M = 4;
  cfg.N = 4;
  cfg.Nz = 2;
  cfg.Ny = 1;
  cfg.Q = Q;
  cfg.P = 1;
  cfg.fractional_doppler = true;
  const auto codes = gen_codes(cfg, rng);
  const int UM = cfg.U * cfg.M, col = 1 * cfg.M + 2;
  Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(Q, UM);
  for (int q = 0; q < Q; ++q) phi(q, col) = std::polar(1.0, 2.0 * std::numbers::pi * k_frac * q);
  const Eigen::MatrixXcd ones = Eigen::MatrixXcd::Ones(Q, UM);
  std::vector<Eigen::MatrixXcd> W(cfg.M), Y(cfg.M), C(cfg.M);
  std::vector<Eigen::MatrixXd> tau(cfg.M);
  for (int l = 0; l < cfg.M; ++l) {
    W[l] = Eigen::MatrixXcd::Zero(std::size_t(UM) * cfg.N, cfg.Na());
    for (int i = 0; i < cfg.N; ++i)
      for (int j = 0; j < cfg.Na(); ++j) W[l](col * cfg.N + i, j) = cnormal(rng);
    tau[l] = Eigen::MatrixXd::Zero(W[l].rows(), W[l].cols());
    Y[l] = build_sensing_matrix(codes, phi, l, cfg) * W[l];
    C[l] = build_sensing_matrix(codes, ones, l, cfg);
  }
  const auto upd = em_update_phi(W, tau, Y, C, 1e-12, 1, cfg);
  if (!upd) return 1e9;
  double err = 0.0;
  for (int q = 0; q < Q; ++q) err = std::max(err, std::abs(std::arg(upd->phi(q, col) * std::conj(phi(q, col)))));
  return err;
}

}  // namespace otfsra::oracle
