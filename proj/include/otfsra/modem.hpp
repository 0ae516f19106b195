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
#include <vector>

#include "otfsra/channel.hpp"
#include "otfsra/config.hpp"

namespace otfsra {

// Doppler rows of every delay-Doppler grid are stored in centered order:
// row i holds Doppler index k = i + kmin, kmin = -floor(N/2).
// Angle columns are a = a_z + Nz * a_y.

struct SpreadingCodeSet {
  int U = 0, Q = 0, N = 0, M = 0;
  std::vector<cd> data;

  cd& at(int u, int q, int i, int l) { return data[((std::size_t(u) * Q + q) * N + i) * M + l]; }
  const cd& at(int u, int q, int i, int l) const {
    return data[((std::size_t(u) * Q + q) * N + i) * M + l];
  }
};

struct EffectiveChannelSet {
  // H[l] is UMN x Na with row u*M*N + l'*N + i.
  std::vector<Eigen::MatrixXcd> H;
};

struct PhaseRotationSet {
  // phi(q, u*M + l').
  Eigen::MatrixXcd phi;
  std::vector<bool> support;  // size U*M, shared by all frames
};

struct SensingBlock {
  int l = 0;
  Eigen::MatrixXcd Y;      // QN x Na
  Eigen::MatrixXcd C_phi;  // QN x UMN, row q*N + i
};

struct SensingPair {
  Eigen::MatrixXcd C_phi;
  Eigen::MatrixXcd C_phi_T;  // C_phi * (T^l kron I_N)
};

// Per-device data symbols t_u, U x M.
using SymbolMatrix = Eigen::MatrixXcd;

SpreadingCodeSet gen_codes(const SystemConfig& cfg, Rng& rng);

Eigen::MatrixXcd isfft(const Eigen::MatrixXcd& dd);
Eigen::MatrixXcd sfft(const Eigen::MatrixXcd& tf);

// (1/sqrt(N)) sum_{i<N} exp(-j 2 pi x i / N)
cd dirichlet(int N, double x);

// Rows are independent samples, columns the Na = Nz*Ny space indices.
Eigen::MatrixXcd angle_dft(const Eigen::MatrixXcd& space, int Nz, int Ny);
Eigen::MatrixXcd inverse_angle_dft(const Eigen::MatrixXcd& angle, int Nz, int Ny);

// Centered cyclic index <x>_N mapped to a storage row.
inline int centered_row(int x, int N) {
  const int h = N / 2;
  int r = (x + h) % N;
  return r < 0 ? r + N : r;
}

EffectiveChannelSet build_effective_channel(const ChannelRealization& real, const SystemConfig& cfg);
PhaseRotationSet true_phase_rotation(const ChannelRealization& real, const SystemConfig& cfg);
PhaseRotationSet unit_phase_rotation(const SystemConfig& cfg);

Eigen::MatrixXcd build_sensing_matrix(const SpreadingCodeSet& codes, const Eigen::MatrixXcd& phi,
                                      int l, const SystemConfig& cfg);
SensingPair build_sensing_block(const SpreadingCodeSet& codes, const PhaseRotationSet& phi,
                                const SymbolMatrix& symbols, int l, const SystemConfig& cfg);

// W^l = (T^l kron I_N) H^l.
Eigen::MatrixXcd apply_symbols(const Eigen::MatrixXcd& H, const SymbolMatrix& symbols, int l,
                               const SystemConfig& cfg);

struct RxSynthesis {
  std::vector<SensingBlock> blocks;
  std::vector<Eigen::MatrixXcd> R;  // noiseless blocks
  EffectiveChannelSet H;
  PhaseRotationSet phi;
  double sigma2 = 0.0;
};

// noiseless = true skips the noise draw (sigma2 is still reported).
RxSynthesis synthesize_rx(const ChannelRealization& real, const SpreadingCodeSet& codes,
                          const SymbolMatrix& symbols, const SystemConfig& cfg, Rng& rng,
                          bool noiseless = false);

double measured_snr_db(const std::vector<Eigen::MatrixXcd>& R, double sigma2,
                       const SystemConfig& cfg);

struct OracleOptions {
  bool enforce_cp = true;
};

// Sample-level chain. Returns angle-domain blocks laid out like SensingBlock::Y.
std::vector<Eigen::MatrixXcd> time_domain_oracle(const ChannelRealization& real,
                                                 const SpreadingCodeSet& codes,
                                                 const SymbolMatrix& symbols,
                                                 const SystemConfig& cfg,
                                                 const OracleOptions& opt = {});

}  // namespace otfsra
