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

#include <complex>
#include <cstdint>
#include <functional>
#include <istream>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace otfsra {

using cd = std::complex<double>;
using Rng = std::mt19937_64;

// Raised for malformed or inconsistent configuration. what() is
// "<source>:<line>: <message>" when a location is known.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SystemConfig {
  int U = 8;
  int M = 8;
  int N = 4;
  int Nz = 2;
  int Ny = 2;
  int Q = 4;
  double delta_f = 30e3;
  int Mcp = -1;  // < 0 selects ceil(tau_max * M * delta_f)
  int P = 2;
  double p_lambda = 0.25;
  std::vector<cd> alphabet;  // empty selects the 4-level NPAM default
  double snr_db = 10.0;
  double tau_max = 699e-6;
  double nu_max = 41e3;
  double rician_k_db = 11.707;
  bool fractional_doppler = false;
  std::string pdp_file;  // empty selects the bundled NTN-TDL-D table

  int Na() const { return Nz * Ny; }
  int cp_len() const;
  double Ts() const { return 1.0 / (M * delta_f); }
  double Tsym() const { return (M + cp_len()) * Ts(); }
  int kmin() const { return -(N / 2); }
  const std::vector<cd>& symbols() const;

  // Full-size system: 40 devices, 16x7 grid, 4x4 array.
  static SystemConfig full_scale();
};

enum class EmPhiMode { Auto, On, Off };

struct ThresholdPolicy {
  enum class Kind { Relative, Absolute };
  Kind kind = Kind::Relative;
  double value = 0.1;
  // Relative rule never drops below floor * M * Na * E|a|^2.
  double floor = 0.1;
};

struct AlgoConfig {
  int I_out = 150;
  int I_mrf = 5;
  double T_out = 1e-6;
  double damping = 0.7;
  int K = 2;
  int P_bar = -1;  // < 0 selects 3 * ceil(p_lambda * U) * P
  ThresholdPolicy threshold;
  double alpha = 0.4;
  double beta = 0.4;
  int em_warmup = 5;
  EmPhiMode em_phi = EmPhiMode::Auto;
  bool em_hyper = true;
  bool genie_symbols = false;  // pin symbol beliefs to the truth (sanity runs)
};

struct Scenario {
  SystemConfig system;
  AlgoConfig algo;
};

std::vector<cd> npam_alphabet(int levels);

// Throws ConfigError describing the first violated invariant.
void validate(const SystemConfig& cfg);
void validate(const AlgoConfig& algo);

int resolved_p_bar(const SystemConfig& cfg, const AlgoConfig& algo);
bool em_phi_enabled(const SystemConfig& cfg, const AlgoConfig& algo);

// Schema-driven key/value access. Keys are dotted paths such as "system.M".
struct ConfigKey {
  std::string path;
  std::string type;
  std::string doc;
  std::function<void(Scenario&, std::string_view)> set;
  std::function<std::string(const Scenario&)> get;
};

const std::vector<ConfigKey>& config_schema();
std::string schema_help();

// Applies "key=value"; throws ConfigError on unknown key or bad value.
void apply_override(Scenario& sc, std::string_view assignment);
void set_value(Scenario& sc, std::string_view key, std::string_view value);

// INI-like text: "[system]" / "[algo]" sections, "key = value", '#' comments.
Scenario parse_scenario(std::istream& in, std::string_view source);
Scenario load_scenario(const std::string& path);
std::string dump_scenario(const Scenario& sc);

}  // namespace otfsra
