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

#include <istream>
#include <string_view>
#include <vector>

#include "otfsra/config.hpp"

namespace otfsra {

struct PowerDelayProfile {
  std::vector<double> delay_ns;
  std::vector<double> power_db;
  bool rician_first = false;
};

// Text table: "rician on|off" line, then "delay_ns power_db" rows.
PowerDelayProfile parse_pdp(std::istream& in, std::string_view source);
const PowerDelayProfile& ntn_tdl_d();
PowerDelayProfile load_pdp(const SystemConfig& cfg);

// gain is referenced to the delay-Doppler grid: it is the coefficient that
// multiplies the Dirichlet kernels in the effective channel. The physical
// antenna gain is gain * exp(-j2*pi*nu*(Mcp*Ts - tau)).
struct PathComponent {
  cd gain;
  double tau = 0.0;
  double nu = 0.0;
  double theta_z = 0.0;
  double theta_y = 0.0;
};

struct TapIndices {
  int l = 0;
  int b = 0;
  int k = 0;
  double k_frac = 0.0;
  int d = 0;
};

struct DevicePath {
  PathComponent comp;
  TapIndices taps;
};

struct ChannelRealization {
  std::vector<int> activity;
  std::vector<std::vector<DevicePath>> paths;
  std::vector<std::vector<int>> delay_tap_set;
};

std::vector<int> sample_activity(int U, double p_lambda, Rng& rng);

TapIndices quantize_taps(double tau, double nu, const SystemConfig& cfg);
double tap_delay(const TapIndices& t, const SystemConfig& cfg);
double tap_doppler(const TapIndices& t, const SystemConfig& cfg);

// Samples activity and geometry. Paths of one device share the direction
// cosines and sit on distinct delay taps modulo M.
ChannelRealization sample_paths(const SystemConfig& cfg, Rng& rng);

}  // namespace otfsra
