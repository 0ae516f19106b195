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

#include "otfsra/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "otfsra/channel.hpp"

namespace otfsra {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  // Shortest text that round-trips.
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

int parse_int(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ConfigError("expected an integer, got '" + std::string(s) + "'");
  return v;
}

double parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty() || std::isnan(v))
    throw ConfigError("expected a number, got '" + std::string(s) + "'");
  return v;
}

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "on" || s == "true" || s == "yes" || s == "1") return true;
  if (s == "off" || s == "false" || s == "no" || s == "0") return false;
  throw ConfigError("expected on|off, got '" + std::string(s) + "'");
}

std::vector<cd> parse_alphabet(std::string_view s) {
  s = trim(s);
  if (s.rfind("npam:", 0) == 0) {
    const int levels = parse_int(s.substr(5));
    if (levels < 1) throw ConfigError("npam level count must be >= 1");
    return npam_alphabet(levels);
  }
  std::vector<cd> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
    if (i >= s.size()) break;
    if (s[i] == '(') {
      const auto close = s.find(')', i);
      if (close == std::string_view::npos) throw ConfigError("unterminated '(' in alphabet");
      const auto body = s.substr(i + 1, close - i - 1);
      const auto comma = body.find(',');
      if (comma == std::string_view::npos) throw ConfigError("alphabet entry needs (re,im)");
      out.emplace_back(parse_double(body.substr(0, comma)), parse_double(body.substr(comma + 1)));
      i = close + 1;
    } else {
      auto end = s.find_first_of(" \t,", i);
      if (end == std::string_view::npos) end = s.size();
      out.emplace_back(parse_double(s.substr(i, end - i)), 0.0);
      i = end;
    }
  }
  if (out.empty()) throw ConfigError("alphabet is empty");
  return out;
}

std::string dump_alphabet(const std::vector<cd>& a) {
  if (a.empty()) return "npam:4";
  if (a == npam_alphabet(int(a.size()))) return "npam:" + std::to_string(a.size());
  std::string out;
  for (const auto& v : a) {
    if (!out.empty()) out += ' ';
    out += "(" + fmt_double(v.real()) + "," + fmt_double(v.imag()) + ")";
  }
  return out;
}

ThresholdPolicy parse_threshold(std::string_view s, ThresholdPolicy base) {
  s = trim(s);
  const auto colon = s.find(':');
  if (colon == std::string_view::npos)
    throw ConfigError("expected relative:<x> or absolute:<x>, got '" + std::string(s) + "'");
  const auto kind = trim(s.substr(0, colon));
  if (kind == "relative") {
    base.kind = ThresholdPolicy::Kind::Relative;
  } else if (kind == "absolute") {
    base.kind = ThresholdPolicy::Kind::Absolute;
  } else {
    throw ConfigError("unknown threshold kind '" + std::string(kind) + "'");
  }
  base.value = parse_double(s.substr(colon + 1));
  return base;
}

EmPhiMode parse_em_phi(std::string_view s) {
  s = trim(s);
  if (s == "auto") return EmPhiMode::Auto;
  if (s == "on" || s == "true") return EmPhiMode::On;
  if (s == "off" || s == "false") return EmPhiMode::Off;
  throw ConfigError("expected auto|on|off, got '" + std::string(s) + "'");
}

const char* em_phi_name(EmPhiMode m) {
  switch (m) {
    case EmPhiMode::On: return "on";
    case EmPhiMode::Off: return "off";
    default: return "auto";
  }
}

template <class T>
ConfigKey int_key(std::string path, std::string doc, T Scenario::*sect, int T::*field) {
  return {std::move(path), "int", std::move(doc),
          [=](Scenario& sc, std::string_view v) { (sc.*sect).*field = parse_int(v); },
          [=](const Scenario& sc) { return std::to_string((sc.*sect).*field); }};
}

template <class T>
ConfigKey real_key(std::string path, std::string doc, T Scenario::*sect, double T::*field) {
  return {std::move(path), "real", std::move(doc),
          [=](Scenario& sc, std::string_view v) { (sc.*sect).*field = parse_double(v); },
          [=](const Scenario& sc) { return fmt_double((sc.*sect).*field); }};
}

template <class T>
ConfigKey bool_key(std::string path, std::string doc, T Scenario::*sect, bool T::*field) {
  return {std::move(path), "on|off", std::move(doc),
          [=](Scenario& sc, std::string_view v) { (sc.*sect).*field = parse_bool(v); },
          [=](const Scenario& sc) { return std::string((sc.*sect).*field ? "on" : "off"); }};
}

std::vector<ConfigKey> make_schema() {
  using S = SystemConfig;
  using A = AlgoConfig;
  auto sys = &Scenario::system;
  auto alg = &Scenario::algo;
  std::vector<ConfigKey> k;
  k.push_back(int_key("system.U", "device count", sys, &S::U));
  k.push_back(int_key("system.M", "delay bins per frame", sys, &S::M));
  k.push_back(int_key("system.N", "Doppler bins per frame", sys, &S::N));
  k.push_back(int_key("system.Nz", "planar array rows", sys, &S::Nz));
  k.push_back(int_key("system.Ny", "planar array columns", sys, &S::Ny));
  k.push_back(int_key("system.Q", "frames per transmission", sys, &S::Q));
  k.push_back(real_key("system.delta_f", "subcarrier spacing [Hz]", sys, &S::delta_f));
  k.push_back(int_key("system.Mcp", "CP length in samples, -1 = ceil(tau_max*M*delta_f)", sys,
                      &S::Mcp));
  k.push_back(int_key("system.P", "paths per device", sys, &S::P));
  k.push_back(real_key("system.p_lambda", "device activity probability", sys, &S::p_lambda));
  k.push_back({"system.alphabet", "symbols",
               "npam:<L> or a list of reals / (re,im) pairs",
               [](Scenario& sc, std::string_view v) { sc.system.alphabet = parse_alphabet(v); },
               [](const Scenario& sc) { return dump_alphabet(sc.system.alphabet); }});
  k.push_back(real_key("system.snr_db", "received SNR [dB]", sys, &S::snr_db));
  k.push_back(real_key("system.tau_max", "max differential delay [s]", sys, &S::tau_max));
  k.push_back(real_key("system.nu_max", "max |Doppler| [Hz]", sys, &S::nu_max));
  k.push_back(real_key("system.rician_k_db", "Rician factor of the first path [dB]", sys,
                       &S::rician_k_db));
  k.push_back(bool_key("system.fractional_doppler", "off snaps Doppler to the grid", sys,
                       &S::fractional_doppler));
  k.push_back({"system.pdp_file", "path", "power-delay profile table, empty = NTN-TDL-D",
               [](Scenario& sc, std::string_view v) { sc.system.pdp_file = std::string(trim(v)); },
               [](const Scenario& sc) { return sc.system.pdp_file; }});

  k.push_back(int_key("algo.I_out", "outer iterations", alg, &A::I_out));
  k.push_back(int_key("algo.I_mrf", "MRF sweeps per outer iteration", alg, &A::I_mrf));
  k.push_back(real_key("algo.T_out", "relative channel-change stopping threshold", alg, &A::T_out));
  k.push_back(real_key("algo.damping", "weight of the new p/g iterate", alg, &A::damping));
  k.push_back(int_key("algo.K", "Gaussian mixture order", alg, &A::K));
  k.push_back(int_key("algo.P_bar", "retained delay taps in EM-phi, -1 = 3*ceil(p*U)*P", alg,
                      &A::P_bar));
  k.push_back({"algo.threshold", "kind:value", "activity threshold, relative:<x> or absolute:<x>",
               [](Scenario& sc, std::string_view v) {
                 sc.algo.threshold = parse_threshold(v, sc.algo.threshold);
               },
               [](const Scenario& sc) {
                 const auto& t = sc.algo.threshold;
                 return std::string(t.kind == ThresholdPolicy::Kind::Relative ? "relative:"
                                                                              : "absolute:") +
                        fmt_double(t.value);
               }});
  k.push_back({"algo.threshold_floor", "real",
               "relative rule floor, fraction of nominal device energy M*Na*E|a|^2",
               [](Scenario& sc, std::string_view v) { sc.algo.threshold.floor = parse_double(v); },
               [](const Scenario& sc) { return fmt_double(sc.algo.threshold.floor); }});
  k.push_back(real_key("algo.alpha", "MRF field parameter", alg, &A::alpha));
  k.push_back(real_key("algo.beta", "MRF coupling parameter", alg, &A::beta));
  k.push_back(int_key("algo.em_warmup", "iterations before EM updates start", alg, &A::em_warmup));
  k.push_back({"algo.em_phi", "auto|on|off", "phase-rotation learning, auto = fractional_doppler",
               [](Scenario& sc, std::string_view v) { sc.algo.em_phi = parse_em_phi(v); },
               [](const Scenario& sc) { return std::string(em_phi_name(sc.algo.em_phi)); }});
  k.push_back(bool_key("algo.em_hyper", "noise and mixture learning", alg, &A::em_hyper));
  k.push_back(bool_key("algo.genie_symbols", "pin symbol beliefs to the truth", alg,
                       &A::genie_symbols));
  return k;
}

}  // namespace

int SystemConfig::cp_len() const {
  if (Mcp >= 0) return Mcp;
  return static_cast<int>(std::ceil(tau_max * M * delta_f - 1e-9));
}

const std::vector<cd>& SystemConfig::symbols() const {
  static const std::vector<cd> fallback = npam_alphabet(4);
  return alphabet.empty() ? fallback : alphabet;
}

SystemConfig SystemConfig::full_scale() {
  SystemConfig c;
  c.U = 40;
  c.M = 16;
  c.N = 7;
  c.Nz = 4;
  c.Ny = 4;
  c.Q = 8;
  c.P = 3;
  c.p_lambda = 0.1;
  return c;
}

std::vector<cd> npam_alphabet(int levels) {
  double power = 0;
  for (int i = 1; i <= levels; ++i) power += double(i) * i;
  const double scale = 1.0 / std::sqrt(power / levels);
  std::vector<cd> a;
  for (int i = 1; i <= levels; ++i) a.emplace_back(i * scale, 0.0);
  return a;
}

void validate(const SystemConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.U < 1 || c.M < 1 || c.N < 1 || c.Nz < 1 || c.Ny < 1 || c.Q < 1 || c.P < 1)
    fail("U, M, N, Nz, Ny, Q and P must all be >= 1");
  if (!(c.p_lambda >= 0.0 && c.p_lambda <= 1.0)) fail("p_lambda must lie in [0, 1]");
  if (!(c.delta_f > 0.0) || std::isinf(c.delta_f)) fail("delta_f must be positive");
  if (!(c.tau_max >= 0.0) || std::isinf(c.tau_max)) fail("tau_max must be non-negative");
  if (!(c.nu_max >= 0.0) || std::isinf(c.nu_max)) fail("nu_max must be non-negative");
  if (std::isnan(c.rician_k_db)) fail("rician_k_db must be a number");
  if (!std::isfinite(c.snr_db)) fail("snr_db must be finite");
  const int need = static_cast<int>(std::ceil(c.tau_max * c.M * c.delta_f - 1e-9));
  if (c.cp_len() < need)
    fail("Mcp = " + std::to_string(c.cp_len()) + " is shorter than tau_max (needs >= " +
         std::to_string(need) + " samples)");
  const auto& a = c.symbols();
  if (a.empty()) fail("alphabet is empty");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i]) == 0.0) fail("alphabet must not contain zero");
    for (std::size_t j = 0; j < i; ++j) {
      if (std::abs(std::abs(a[i]) - std::abs(a[j])) <= 1e-12 * std::abs(a[j]))
        fail("alphabet entries " + std::to_string(j) + " and " + std::to_string(i) +
             " differ by a unit-modulus factor");
    }
  }
  const int reachable = static_cast<int>(
      std::min<long long>(c.M, static_cast<long long>(std::floor(c.tau_max * c.M * c.delta_f + 1e-9)) + 1));
  if (c.P > reachable)
    fail("P = " + std::to_string(c.P) + " exceeds the " + std::to_string(reachable) +
         " distinct delay taps reachable within tau_max");
  const auto pdp = load_pdp(c);
  if (c.P > static_cast<int>(pdp.power_db.size()))
    fail("P = " + std::to_string(c.P) + " exceeds the power-delay profile length " +
         std::to_string(pdp.power_db.size()));
}

void validate(const AlgoConfig& a) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (a.I_out < 1) fail("I_out must be >= 1");
  if (a.I_mrf < 0) fail("I_mrf must be >= 0");
  if (!(a.T_out >= 0.0)) fail("T_out must be >= 0");
  if (!(a.damping > 0.0 && a.damping <= 1.0)) fail("damping must lie in (0, 1]");
  if (a.K < 1) fail("K must be >= 1");
  if (!std::isfinite(a.alpha) || !std::isfinite(a.beta)) fail("alpha and beta must be finite");
  if (a.em_warmup < 0) fail("em_warmup must be >= 0");
  if (!(a.threshold.value >= 0.0) || !(a.threshold.floor >= 0.0))
    fail("threshold values must be >= 0");
  if (a.P_bar == 0 || a.P_bar < -1) fail("P_bar must be positive or -1");
}

int resolved_p_bar(const SystemConfig& cfg, const AlgoConfig& algo) {
  const int cap = cfg.U * cfg.M;
  if (algo.P_bar > 0) return std::min(algo.P_bar, cap);
  const int active = static_cast<int>(std::ceil(cfg.p_lambda * cfg.U - 1e-9));
  return std::clamp(3 * active * cfg.P, std::min(cfg.P, cap), cap);
}

bool em_phi_enabled(const SystemConfig& cfg, const AlgoConfig& algo) {
  if (algo.em_phi == EmPhiMode::Auto) return cfg.fractional_doppler;
  return algo.em_phi == EmPhiMode::On;
}

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = make_schema();
  return schema;
}

std::string schema_help() {
  const Scenario defaults;
  std::ostringstream os;
  os << "Configuration keys (file sections [system]/[algo], or --override key=value):\n";
  for (const auto& k : config_schema()) {
    os << "  " << k.path << " <" << k.type << ">  " << k.doc << "  [default: " << k.get(defaults)
       << "]\n";
  }
  return os.str();
}

void set_value(Scenario& sc, std::string_view key, std::string_view value) {
  const auto& schema = config_schema();
  const auto it = std::find_if(schema.begin(), schema.end(),
                               [&](const ConfigKey& k) { return k.path == key; });
  if (it == schema.end()) throw ConfigError("unknown key '" + std::string(key) + "'");
  try {
    it->set(sc, value);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(key) + ": " + e.what());
  }
}

void apply_override(Scenario& sc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos)
    throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  set_value(sc, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

Scenario parse_scenario(std::istream& in, std::string_view source) {
  Scenario sc;
  std::string section;
  std::map<std::string, int> seen;
  std::string raw;
  int lineno = 0;
  auto where = [&]() { return std::string(source) + ":" + std::to_string(lineno) + ": "; };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where() + "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "system" && section != "algo")
        throw ConfigError(where() + "unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where() + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where() + "missing key");
    std::string full;
    if (key.find('.') != std::string_view::npos) {
      if (!section.empty()) throw ConfigError(where() + "dotted key inside a section");
      full = std::string(key);
    } else {
      if (section.empty()) throw ConfigError(where() + "key outside a [system]/[algo] section");
      full = section + "." + std::string(key);
    }
    if (const auto [it, fresh] = seen.emplace(full, lineno); !fresh)
      throw ConfigError(where() + "duplicate key '" + full + "' (first set on line " +
                        std::to_string(it->second) + ")");
    try {
      set_value(sc, full, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where() + e.what());
    }
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  return parse_scenario(in, path);
}

std::string dump_scenario(const Scenario& sc) {
  std::ostringstream os;
  std::string section;
  for (const auto& k : config_schema()) {
    const auto dot = k.path.find('.');
    const auto sect = k.path.substr(0, dot);
    if (sect != section) {
      if (!section.empty()) os << "\n";
      os << "[" << sect << "]\n";
      section = sect;
    }
    os << k.path.substr(dot + 1) << " = " << k.get(sc) << "\n";
  }
  return os.str();
}

}  // namespace otfsra
