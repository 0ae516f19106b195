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

#include "otfsra/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace otfsra {

namespace {

// 3GPP NTN-TDL-D, normalized delays scaled by a 100 ns delay spread. The
// first tap carries the LOS (-0.284 dB) and Rayleigh (-11.991 dB) parts.
constexpr const char* kNtnTdlD = R"(# NTN-TDL-D, DS = 100 ns
rician on
# delay_ns  power_db
0.00        0.000
55.96      -9.887
733.40    -16.771
)";

}  // namespace

PowerDelayProfile parse_pdp(std::istream& in, std::string_view source) {
  PowerDelayProfile pdp;
  std::string raw;
  int lineno = 0;
  bool have_flag = false;
  auto where = [&]() { return std::string(source) + ":" + std::to_string(lineno) + ": "; };
  while (std::getline(in, raw)) {
    ++lineno;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "rician") {
      std::string flag;
      if (!(ls >> flag) || (flag != "on" && flag != "off"))
        throw ConfigError(where() + "expected 'rician on' or 'rician off'");
      if (have_flag) throw ConfigError(where() + "duplicate rician line");
      pdp.rician_first = flag == "on";
      have_flag = true;
      continue;
    }
    std::istringstream row(raw);
    double delay = 0, power = 0;
    std::string extra;
    if (!(row >> delay >> power) || (row >> extra))
      throw ConfigError(where() + "expected two numbers 'delay_ns power_db'");
    if (delay < 0 || !std::isfinite(delay) || !std::isfinite(power))
      throw ConfigError(where() + "delay must be >= 0 and power finite");
    if (!pdp.delay_ns.empty() && delay < pdp.delay_ns.back())
      throw ConfigError(where() + "delays must be non-decreasing");
    pdp.delay_ns.push_back(delay);
    pdp.power_db.push_back(power);
  }
  if (!have_flag) throw ConfigError(std::string(source) + ": missing 'rician on|off' line");
  if (pdp.power_db.empty()) throw ConfigError(std::string(source) + ": no taps");
  return pdp;
}

const PowerDelayProfile& ntn_tdl_d() {
  static const PowerDelayProfile pdp = [] {
    std::istringstream in(kNtnTdlD);
    return parse_pdp(in, "<NTN-TDL-D>");
  }();
  return pdp;
}

PowerDelayProfile load_pdp(const SystemConfig& cfg) {
  if (cfg.pdp_file.empty()) return ntn_tdl_d();
  std::ifstream in(cfg.pdp_file);
  if (!in) throw ConfigError(cfg.pdp_file + ": cannot open power-delay profile");
  return parse_pdp(in, cfg.pdp_file);
}

std::vector<int> sample_activity(int U, double p_lambda, Rng& rng) {
  std::bernoulli_distribution coin(p_lambda);
  std::vector<int> a(U);
  for (auto& v : a) v = coin(rng) ? 1 : 0;
  return a;
}

TapIndices quantize_taps(double tau, double nu, const SystemConfig& cfg) {
  TapIndices t;
  const long long D = std::llround(tau * cfg.M * cfg.delta_f);
  t.l = static_cast<int>(D % cfg.M);
  t.b = static_cast<int>(D / cfg.M);

  double x = nu * cfg.N * cfg.Tsym();
  if (!cfg.fractional_doppler) x = std::round(x);
  const double r = std::ceil(x - 0.5);
  t.k_frac = x - r;
  if (std::abs(t.k_frac) < 1e-9) t.k_frac = 0.0;
  const long long ri = static_cast<long long>(r);
  const long long kmin = cfg.kmin();
  long long shifted = (ri - kmin) % cfg.N;
  if (shifted < 0) shifted += cfg.N;
  t.k = static_cast<int>(shifted + kmin);
  t.d = static_cast<int>((ri - t.k) / cfg.N);
  return t;
}

double tap_delay(const TapIndices& t, const SystemConfig& cfg) {
  return (t.l + static_cast<double>(t.b) * cfg.M) / (cfg.M * cfg.delta_f);
}

double tap_doppler(const TapIndices& t, const SystemConfig& cfg) {
  return (t.k + t.k_frac + static_cast<double>(t.d) * cfg.N) / (cfg.N * cfg.Tsym());
}

ChannelRealization sample_paths(const SystemConfig& cfg, Rng& rng) {
  constexpr double pi = std::numbers::pi;
  ChannelRealization real;
  real.activity = sample_activity(cfg.U, cfg.p_lambda, rng);

  const auto pdp = load_pdp(cfg);
  std::vector<double> power(cfg.P);
  double total = 0;
  for (int i = 0; i < cfg.P; ++i) total += power[i] = std::pow(10.0, pdp.power_db.at(i) / 10.0);
  for (auto& p : power) p /= total;
  const double kfac = std::pow(10.0, cfg.rician_k_db / 10.0);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
  const long long max_delay = static_cast<long long>(std::floor(cfg.tau_max * cfg.M * cfg.delta_f + 1e-9));
  const int reachable = static_cast<int>(std::min<long long>(cfg.M, max_delay + 1));
  if (cfg.P > reachable) throw ConfigError("P exceeds the distinct delay taps within tau_max");

  real.paths.resize(cfg.U);
  real.delay_tap_set.resize(cfg.U);
  for (int u = 0; u < cfg.U; ++u) {
    const double zenith = -pi / 2 + pi * unit(rng);
    const double azimuth = 2 * pi * unit(rng);
    const double theta_z = std::cos(zenith);
    const double theta_y = std::sin(zenith) * std::sin(azimuth);
    auto& taps_used = real.delay_tap_set[u];
    for (int i = 0; i < cfg.P; ++i) {
      TapIndices taps;
      for (;;) {
        const double tau = cfg.tau_max * unit(rng);
        const double nu = cfg.nu_max * (2 * unit(rng) - 1);
        taps = quantize_taps(tau, nu, cfg);
        const long long D = taps.l + static_cast<long long>(taps.b) * cfg.M;
        if (D > max_delay) continue;
        if (std::abs(tap_doppler(taps, cfg)) > cfg.nu_max * (1 + 1e-12)) continue;
        if (std::find(taps_used.begin(), taps_used.end(), taps.l) != taps_used.end()) continue;
        break;
      }
      taps_used.push_back(taps.l);

      const cd g(gauss(rng), gauss(rng));
      cd h;
      if (i == 0 && pdp.rician_first) {
        const double psi = 2 * pi * unit(rng);
        const cd los = std::polar(1.0, psi);
        h = std::isinf(kfac) ? los
                             : std::sqrt(kfac / (kfac + 1)) * los + std::sqrt(1 / (kfac + 1)) * g;
      } else {
        h = g;
      }
      DevicePath dp;
      dp.taps = taps;
      dp.comp.gain = std::sqrt(power[i]) * h;
      dp.comp.tau = tap_delay(taps, cfg);
      dp.comp.nu = tap_doppler(taps, cfg);
      dp.comp.theta_z = theta_z;
      dp.comp.theta_y = theta_y;
      real.paths[u].push_back(dp);
    }
  }
  return real;
}

}  // namespace otfsra
