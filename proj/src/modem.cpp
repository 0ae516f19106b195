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

#include "otfsra/modem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace otfsra {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cd expj(double phase) { return std::polar(1.0, phase); }

// F[l, m] = exp(-j 2 pi m l / M)
Eigen::MatrixXcd delay_dft(int M) {
  Eigen::MatrixXcd F(M, M);
  for (int l = 0; l < M; ++l)
    for (int m = 0; m < M; ++m) F(l, m) = expj(-kTwoPi * double((long long)m * l % M) / M);
  return F;
}

// G[n, i] = exp(+j 2 pi n k_i / N), k_i = i + kmin
Eigen::MatrixXcd doppler_dft(int N) {
  const int kmin = -(N / 2);
  Eigen::MatrixXcd G(N, N);
  for (int n = 0; n < N; ++n)
    for (int i = 0; i < N; ++i) {
      long long e = (long long)n * (i + kmin) % N;
      if (e < 0) e += N;
      G(n, i) = expj(kTwoPi * double(e) / N);
    }
  return G;
}

Eigen::MatrixXcd space_dft(int Nz, int Ny) {
  const int Na = Nz * Ny;
  Eigen::MatrixXcd F(Na, Na);
  const double s = 1.0 / std::sqrt(double(Na));
  for (int ny = 0; ny < Ny; ++ny)
    for (int nz = 0; nz < Nz; ++nz)
      for (int ay = 0; ay < Ny; ++ay)
        for (int az = 0; az < Nz; ++az) {
          const double ph = -kTwoPi * (double(az * nz % Nz) / Nz + double(ay * ny % Ny) / Ny);
          F(nz + Nz * ny, az + Nz * ay) = s * expj(ph);
        }
  return F;
}

void check_dims(const SpreadingCodeSet& codes, const SystemConfig& cfg) {
  if (codes.U != cfg.U || codes.Q != cfg.Q || codes.N != cfg.N || codes.M != cfg.M)
    throw std::invalid_argument("code set dimensions do not match the configuration");
}

}  // namespace

SpreadingCodeSet gen_codes(const SystemConfig& cfg, Rng& rng) {
  SpreadingCodeSet c;
  c.U = cfg.U;
  c.Q = cfg.Q;
  c.N = cfg.N;
  c.M = cfg.M;
  c.data.resize(std::size_t(c.U) * c.Q * c.N * c.M);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 / (double(cfg.Q) * cfg.N)));
  for (auto& v : c.data) {
    const double re = g(rng);
    v = cd(re, g(rng));
  }
  return c;
}

Eigen::MatrixXcd isfft(const Eigen::MatrixXcd& dd) {
  const int N = int(dd.rows()), M = int(dd.cols());
  if (N < 1 || M < 1) throw std::invalid_argument("isfft: empty grid");
  return doppler_dft(N) * dd * delay_dft(M) / std::sqrt(double(M) * N);
}

Eigen::MatrixXcd sfft(const Eigen::MatrixXcd& tf) {
  const int N = int(tf.rows()), M = int(tf.cols());
  if (N < 1 || M < 1) throw std::invalid_argument("sfft: empty grid");
  return doppler_dft(N).adjoint() * tf * delay_dft(M).adjoint() / std::sqrt(double(M) * N);
}

cd dirichlet(int N, double x) {
  const double xr = x - N * std::floor(x / N);
  cd acc = 0.0;
  for (int i = 0; i < N; ++i) acc += expj(-kTwoPi * xr * i / N);
  return acc / std::sqrt(double(N));
}

Eigen::MatrixXcd angle_dft(const Eigen::MatrixXcd& space, int Nz, int Ny) {
  if (space.cols() != Nz * Ny) throw std::invalid_argument("angle_dft: column count != Nz*Ny");
  return space * space_dft(Nz, Ny);
}

Eigen::MatrixXcd inverse_angle_dft(const Eigen::MatrixXcd& angle, int Nz, int Ny) {
  if (angle.cols() != Nz * Ny) throw std::invalid_argument("angle_dft: column count != Nz*Ny");
  return angle * space_dft(Nz, Ny).adjoint();
}

EffectiveChannelSet build_effective_channel(const ChannelRealization& real, const SystemConfig& cfg) {
  const int M = cfg.M, N = cfg.N, Na = cfg.Na();
  const int kmin = cfg.kmin();
  const double Ts = cfg.Ts();
  EffectiveChannelSet out;
  out.H.assign(M, Eigen::MatrixXcd::Zero(std::size_t(cfg.U) * M * N, Na));
  std::vector<cd> dop(N), ang(Na);
  for (int u = 0; u < cfg.U; ++u) {
    if (!real.activity[u]) continue;
    for (const auto& p : real.paths[u]) {
      const auto& t = p.taps;
      for (int i = 0; i < N; ++i) dop[i] = dirichlet(N, (i + kmin) - (t.k + t.k_frac));
      for (int ay = 0; ay < cfg.Ny; ++ay)
        for (int az = 0; az < cfg.Nz; ++az)
          ang[az + cfg.Nz * ay] = dirichlet(cfg.Nz, az - cfg.Nz * p.comp.theta_z / 2) *
                                  dirichlet(cfg.Ny, ay - cfg.Ny * p.comp.theta_y / 2);
      const std::size_t row0 = (std::size_t(u) * M + t.l) * N;
      for (int l = 0; l < M; ++l) {
        const cd coef = p.comp.gain * expj(kTwoPi * p.comp.nu * l * Ts) / std::sqrt(double(N));
        for (int i = 0; i < N; ++i)
          for (int a = 0; a < Na; ++a) out.H[l](row0 + i, a) += coef * dop[i] * ang[a];
      }
    }
  }
  return out;
}

PhaseRotationSet true_phase_rotation(const ChannelRealization& real, const SystemConfig& cfg) {
  PhaseRotationSet s;
  s.phi = Eigen::MatrixXcd::Zero(cfg.Q, cfg.U * cfg.M);
  s.support.assign(std::size_t(cfg.U) * cfg.M, false);
  for (int u = 0; u < cfg.U; ++u)
    for (const auto& p : real.paths[u]) {
      const int col = u * cfg.M + p.taps.l;
      s.support[col] = true;
      for (int q = 0; q < cfg.Q; ++q)
        s.phi(q, col) = q == 0 ? cd(1.0) : expj(kTwoPi * p.taps.k_frac * q);
    }
  return s;
}

PhaseRotationSet unit_phase_rotation(const SystemConfig& cfg) {
  PhaseRotationSet s;
  s.phi = Eigen::MatrixXcd::Ones(cfg.Q, cfg.U * cfg.M);
  s.support.assign(std::size_t(cfg.U) * cfg.M, true);
  return s;
}

Eigen::MatrixXcd build_sensing_matrix(const SpreadingCodeSet& codes, const Eigen::MatrixXcd& phi,
                                      int l, const SystemConfig& cfg) {
  check_dims(codes, cfg);
  const int M = cfg.M, N = cfg.N, Q = cfg.Q;
  if (phi.rows() != Q || phi.cols() != cfg.U * M)
    throw std::invalid_argument("phase rotation set has wrong shape");
  if (l < 0 || l >= M) throw std::invalid_argument("delay bin out of range");
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(std::size_t(Q) * N, std::size_t(cfg.U) * M * N);
  for (int u = 0; u < cfg.U; ++u)
    for (int lp = 0; lp < M; ++lp) {
      const int s = ((l - lp) % M + M) % M;
      const std::size_t col0 = (std::size_t(u) * M + lp) * N;
      for (int q = 0; q < Q; ++q) {
        const cd f = phi(q, u * M + lp);
        if (f == cd(0.0)) continue;
        for (int c = 0; c < N; ++c)
          for (int r = 0; r < N; ++r)
            C(q * N + r, col0 + c) = f * codes.at(u, q, centered_row(r - c, N), s);
      }
    }
  return C;
}

Eigen::MatrixXcd apply_symbols(const Eigen::MatrixXcd& H, const SymbolMatrix& symbols, int l,
                               const SystemConfig& cfg) {
  const int M = cfg.M, N = cfg.N;
  if (symbols.rows() != cfg.U || symbols.cols() != M)
    throw std::invalid_argument("symbol matrix must be U x M");
  Eigen::MatrixXcd W = H;
  for (int u = 0; u < cfg.U; ++u)
    for (int lp = 0; lp < M; ++lp) {
      const cd t = symbols(u, ((l - lp) % M + M) % M);
      W.middleRows((std::size_t(u) * M + lp) * N, N) *= t;
    }
  return W;
}

SensingPair build_sensing_block(const SpreadingCodeSet& codes, const PhaseRotationSet& phi,
                                const SymbolMatrix& symbols, int l, const SystemConfig& cfg) {
  SensingPair p;
  p.C_phi = build_sensing_matrix(codes, phi.phi, l, cfg);
  if (symbols.rows() != cfg.U || symbols.cols() != cfg.M)
    throw std::invalid_argument("symbol matrix must be U x M");
  p.C_phi_T = p.C_phi;
  const int M = cfg.M, N = cfg.N;
  for (int u = 0; u < cfg.U; ++u)
    for (int lp = 0; lp < M; ++lp)
      p.C_phi_T.middleCols((std::size_t(u) * M + lp) * N, N) *= symbols(u, ((l - lp) % M + M) % M);
  return p;
}

RxSynthesis synthesize_rx(const ChannelRealization& real, const SpreadingCodeSet& codes,
                          const SymbolMatrix& symbols, const SystemConfig& cfg, Rng& rng,
                          bool noiseless) {
  RxSynthesis rx;
  rx.H = build_effective_channel(real, cfg);
  rx.phi = true_phase_rotation(real, cfg);
  const int M = cfg.M;
  double energy = 0.0;
  rx.blocks.resize(M);
  rx.R.resize(M);
  for (int l = 0; l < M; ++l) {
    rx.blocks[l].l = l;
    rx.blocks[l].C_phi = build_sensing_matrix(codes, rx.phi.phi, l, cfg);
    rx.R[l] = rx.blocks[l].C_phi * apply_symbols(rx.H.H[l], symbols, l, cfg);
    energy += rx.R[l].squaredNorm();
  }
  const double snr = std::pow(10.0, cfg.snr_db / 10.0);
  const double entries = double(cfg.Q) * M * cfg.N * cfg.Na();
  if (energy > 0.0) {
    rx.sigma2 = energy / (entries * snr);
  } else {
    // Nothing transmitted: reference the nominal power of one active device.
    double ea2 = 0.0;
    for (const auto& a : cfg.symbols()) ea2 += std::norm(a);
    ea2 /= double(cfg.symbols().size());
    rx.sigma2 = ea2 / (double(cfg.Q) * cfg.N) / snr;
  }
  std::normal_distribution<double> g(0.0, std::sqrt(rx.sigma2 / 2));
  for (int l = 0; l < M; ++l) {
    rx.blocks[l].Y = rx.R[l];
    if (noiseless) continue;
    for (Eigen::Index j = 0; j < rx.R[l].cols(); ++j)
      for (Eigen::Index o = 0; o < rx.R[l].rows(); ++o) {
        const double re = g(rng);
        rx.blocks[l].Y(o, j) += cd(re, g(rng));
      }
  }
  return rx;
}

double measured_snr_db(const std::vector<Eigen::MatrixXcd>& R, double sigma2,
                       const SystemConfig& cfg) {
  double e = 0.0;
  for (const auto& r : R) e += r.squaredNorm();
  return 10.0 * std::log10(e / (double(cfg.Q) * cfg.M * cfg.N * cfg.Na() * sigma2));
}

std::vector<Eigen::MatrixXcd> time_domain_oracle(const ChannelRealization& real,
                                                 const SpreadingCodeSet& codes,
                                                 const SymbolMatrix& symbols,
                                                 const SystemConfig& cfg,
                                                 const OracleOptions& opt) {
  check_dims(codes, cfg);
  const int M = cfg.M, N = cfg.N, Q = cfg.Q, Na = cfg.Na();
  const int Mcp = cfg.cp_len();
  const int L = M + Mcp;
  const double Ts = cfg.Ts();
  const std::size_t T = std::size_t(Q) * N * L;

  struct Tap {
    int u;
    long long D;
    cd h;
    double nu, tz, ty;
  };
  std::vector<Tap> taps;
  for (int u = 0; u < cfg.U; ++u) {
    if (!real.activity[u]) continue;
    for (const auto& p : real.paths[u]) {
      const double x = p.comp.tau * M * cfg.delta_f;
      const long long D = std::llround(x);
      if (std::abs(x - double(D)) > 1e-6)
        throw std::invalid_argument("time_domain_oracle: fractional delay is not supported");
      if (opt.enforce_cp && D > Mcp)
        throw std::invalid_argument("time_domain_oracle: cyclic prefix shorter than path delay");
      const cd h_phys = p.comp.gain * expj(-kTwoPi * p.comp.nu * (Mcp * Ts - p.comp.tau));
      taps.push_back({u, D, h_phys, p.comp.nu, p.comp.theta_z, p.comp.theta_y});
    }
  }

  // Transmit waveforms, one per device, CP included, burst starts at sample 0.
  std::vector<std::vector<cd>> s(cfg.U);
  for (int u = 0; u < cfg.U; ++u) {
    if (!real.activity[u]) continue;
    s[u].assign(T, 0.0);
    for (int q = 0; q < Q; ++q) {
      Eigen::MatrixXcd X(N, M);
      for (int i = 0; i < N; ++i)
        for (int l = 0; l < M; ++l) X(i, l) = codes.at(u, q, i, l) * symbols(u, l);
      const Eigen::MatrixXcd Xtf = isfft(X);
      for (int n = 0; n < N; ++n) {
        const std::size_t start = std::size_t(q * N + n) * L;
        for (int p = 0; p < L; ++p) {
          cd acc = 0.0;
          for (int m = 0; m < M; ++m) {
            long long e = (long long)m * (p - Mcp) % M;
            if (e < 0) e += M;
            acc += Xtf(n, m) * expj(kTwoPi * double(e) / M);
          }
          s[u][start + p] = acc;
        }
      }
    }
  }

  std::vector<Eigen::MatrixXcd> space(M, Eigen::MatrixXcd::Zero(std::size_t(Q) * N, Na));
  std::vector<cd> r(T);
  for (int ny = 0; ny < cfg.Ny; ++ny)
    for (int nz = 0; nz < cfg.Nz; ++nz) {
      std::fill(r.begin(), r.end(), cd(0.0));
      for (const auto& tp : taps) {
        const cd steer = expj(std::numbers::pi * (nz * tp.tz + ny * tp.ty));
        for (std::size_t t = std::size_t(tp.D); t < T; ++t) {
          const double tx = double(t - tp.D) * Ts;
          r[t] += tp.h * steer * s[tp.u][t - tp.D] * expj(kTwoPi * tp.nu * tx);
        }
      }
      const int a = nz + cfg.Nz * ny;
      for (int q = 0; q < Q; ++q) {
        Eigen::MatrixXcd Ytf(N, M);
        for (int n = 0; n < N; ++n) {
          const std::size_t base = std::size_t(q * N + n) * L + Mcp;
          for (int m = 0; m < M; ++m) {
            cd acc = 0.0;
            for (int p = 0; p < M; ++p)
              acc += r[base + p] * expj(-kTwoPi * double((long long)m * p % M) / M);
            Ytf(n, m) = acc / double(M);
          }
        }
        const Eigen::MatrixXcd Ydd = sfft(Ytf);
        for (int l = 0; l < M; ++l)
          for (int i = 0; i < N; ++i) space[l](q * N + i, a) = Ydd(i, l);
      }
    }
  for (auto& blk : space) blk = angle_dft(blk, cfg.Nz, cfg.Ny);
  return space;
}

}  // namespace otfsra
