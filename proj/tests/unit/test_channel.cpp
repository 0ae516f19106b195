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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "otfsra/channel.hpp"

using namespace otfsra;

TEST_CASE("sample_activity at the probability extremes") {
  Rng rng(1);
  CHECK(sample_activity(5, 0.0, rng) == std::vector<int>(5, 0));
  CHECK(sample_activity(5, 1.0, rng) == std::vector<int>(5, 1));
}

TEST_CASE("sample_activity count matches binomial moments") {
  Rng rng(2);
  constexpr int draws = 10000;
  double sum = 0.0;
  for (int t = 0; t < draws; ++t) {
    const auto a = sample_activity(40, 0.1, rng);
    sum += std::count(a.begin(), a.end(), 1);
  }
  const double sd_of_mean = std::sqrt(40 * 0.1 * 0.9 / draws);
  CHECK(std::abs(sum / draws - 4.0) < 3 * sd_of_mean);
}

TEST_CASE("quantize_taps worked values") {
  SystemConfig c;
  c.fractional_doppler = true;
  auto t = quantize_taps(0.0, 0.0, c);
  CHECK(t.l == 0);
  CHECK(t.b == 0);
  CHECK(t.k == 0);
  CHECK(t.k_frac == 0.0);
  CHECK(t.d == 0);

  t = quantize_taps(0.0, 1.0 / (c.N * c.Tsym()), c);
  CHECK(t.k == 1);
  CHECK(t.k_frac == doctest::Approx(0.0));
  CHECK(t.d == 0);

  SystemConfig c16;
  c16.M = 16;
  t = quantize_taps(698.62e-6, 0.0, c16);
  CHECK(t.l == 15);
  CHECK(t.b == 20);
}

TEST_CASE("quantize_taps wraps Doppler and keeps the fraction in (-1/2, 1/2]") {
  SystemConfig c;
  c.fractional_doppler = true;
  const double unit = 1.0 / (c.N * c.Tsym());
  for (double x : {-7.3, -2.5, -0.49, 0.5, 1.7, 2.2, 9.9}) {
    const auto t = quantize_taps(0.0, x * unit, c);
    CHECK(t.k >= c.kmin());
    CHECK(t.k <= c.kmin() + c.N - 1);
    CHECK(t.k_frac > -0.5);
    CHECK(t.k_frac <= 0.5);
    CHECK(t.k + t.k_frac + t.d * c.N == doctest::Approx(x).epsilon(1e-12));
  }
  c.fractional_doppler = false;
  const auto t = quantize_taps(0.0, 1.3 * unit, c);
  CHECK(t.k == 1);
  CHECK(t.k_frac == 0.0);
}

TEST_CASE("sampled paths respect bounds and the tap reconstruction") {
  SystemConfig c;
  c.U = 20;
  c.fractional_doppler = true;
  Rng rng(3);
  const auto real = sample_paths(c, rng);
  REQUIRE(real.paths.size() == 20u);
  for (int u = 0; u < c.U; ++u) {
    REQUIRE(real.paths[u].size() == std::size_t(c.P));
    std::vector<int> taps;
    for (const auto& p : real.paths[u]) {
      CHECK(p.comp.tau >= 0.0);
      CHECK(p.comp.tau <= c.tau_max);
      CHECK(std::abs(p.comp.nu) <= c.nu_max * (1 + 1e-12));
      CHECK(p.comp.theta_z * p.comp.theta_z + p.comp.theta_y * p.comp.theta_y <= 1.0 + 1e-15);
      CHECK(p.comp.tau == tap_delay(p.taps, c));
      CHECK(p.comp.nu == tap_doppler(p.taps, c));
      taps.push_back(p.taps.l);
    }
    std::sort(taps.begin(), taps.end());
    CHECK(std::adjacent_find(taps.begin(), taps.end()) == taps.end());
    CHECK(real.delay_tap_set[u].size() == std::size_t(c.P));
    // One direction per device.
    CHECK(real.paths[u][0].comp.theta_z == real.paths[u][1].comp.theta_z);
  }
}

TEST_CASE("on-grid mode leaves no fractional Doppler") {
  SystemConfig c;
  c.U = 10;
  Rng rng(4);
  const auto real = sample_paths(c, rng);
  for (const auto& dev : real.paths)
    for (const auto& p : dev) CHECK(p.taps.k_frac == 0.0);
}

TEST_CASE("sample_paths is bit-reproducible") {
  SystemConfig c;
  c.fractional_doppler = true;
  Rng a(9), b(9);
  const auto ra = sample_paths(c, a), rb = sample_paths(c, b);
  CHECK(ra.activity == rb.activity);
  for (int u = 0; u < c.U; ++u)
    for (int i = 0; i < c.P; ++i) {
      CHECK(ra.paths[u][i].comp.gain == rb.paths[u][i].comp.gain);
      CHECK(ra.paths[u][i].comp.nu == rb.paths[u][i].comp.nu);
    }
}

TEST_CASE("pure line-of-sight single path has unit gain") {
  SystemConfig c;
  c.P = 1;
  c.rician_k_db = std::numeric_limits<double>::infinity();
  Rng rng(5);
  const auto real = sample_paths(c, rng);
  for (const auto& dev : real.paths) CHECK(std::abs(dev[0].comp.gain) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expected total path power is one") {
  SystemConfig c;
  c.U = 1;
  c.p_lambda = 1.0;
  Rng rng(6);
  constexpr int draws = 20000;
  double sum = 0.0, sq = 0.0;
  for (int t = 0; t < draws; ++t) {
    const auto real = sample_paths(c, rng);
    double e = 0.0;
    for (const auto& p : real.paths[0]) e += std::norm(p.comp.gain);
    sum += e;
    sq += e * e;
  }
  const double mean = sum / draws, sd = std::sqrt(sq / draws - mean * mean);
  CHECK(std::abs(mean - 1.0) < 4 * sd / std::sqrt(double(draws)));
}

TEST_CASE("power-delay profile table parsing") {
  std::istringstream in("# profile\nrician on\n0 0\n100 -3.5\n");
  const auto p = parse_pdp(in, "t");
  REQUIRE(p.delay_ns.size() == 2);
  CHECK(p.rician_first);
  CHECK(p.power_db[1] == -3.5);

  std::istringstream bad("rician maybe\n0 0\n");
  CHECK_THROWS_AS(parse_pdp(bad, "t"), ConfigError);
  CHECK(ntn_tdl_d().rician_first);
  CHECK(ntn_tdl_d().delay_ns.size() >= 2);
}
