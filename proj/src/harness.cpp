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

#include "otfsra/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "otfsra/channel.hpp"
#include "otfsra/tensor_io.hpp"

namespace otfsra {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int nearest_symbol(cd x, const std::vector<cd>& alphabet) {
  int best = 0;
  for (int m = 1; m < int(alphabet.size()); ++m)
    if (std::abs(x - alphabet[m]) < std::abs(x - alphabet[best])) best = m;
  return best;
}

Tensor symbols_tensor(const std::string& name, const SymbolMatrix& s) {
  std::vector<cd> data(std::size_t(s.size()));
  for (Eigen::Index u = 0; u < s.rows(); ++u)
    for (Eigen::Index k = 0; k < s.cols(); ++k) data[u * s.cols() + k] = s(u, k);
  return complex_tensor(name, {std::size_t(s.rows()), std::size_t(s.cols())}, std::move(data));
}

SymbolMatrix symbols_from(const Tensor& t) {
  if (t.shape.size() != 2 || !t.is_complex()) throw std::runtime_error(t.name + ": expected complex [U,M]");
  SymbolMatrix s(t.shape[0], t.shape[1]);
  for (std::size_t u = 0; u < t.shape[0]; ++u)
    for (std::size_t k = 0; k < t.shape[1]; ++k) s(u, k) = t.cdata[u * t.shape[1] + k];
  return s;
}

Tensor flags_tensor(const std::string& name, const std::vector<int>& v) {
  return real_tensor(name, {v.size()}, std::vector<double>(v.begin(), v.end()));
}

std::vector<int> flags_from(const Tensor& t) {
  std::vector<int> v;
  for (double x : t.rdata) v.push_back(int(std::lround(x)));
  return v;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

}  // namespace

Metrics compute_metrics(const TrialTruth& truth, const TrialEstimates& est) {
  const std::size_t U = truth.activity.size();
  if (est.activity_hat.size() != U || truth.symbols.rows() != est.symbols_hat.rows() ||
      truth.symbols.cols() != est.symbols_hat.cols() || truth.H.size() != est.h_hat.size())
    throw std::invalid_argument("compute_metrics: shape mismatch");
  Metrics m;
  double act_err = 0.0;
  for (std::size_t u = 0; u < U; ++u) act_err += std::abs(truth.activity[u] - est.activity_hat[u]);
  m.aer = U ? act_err / double(U) : 0.0;

  double e_true = 0.0, e_err = 0.0;
  for (std::size_t l = 0; l < truth.H.size(); ++l) {
    e_true += truth.H[l].squaredNorm();
    e_err += (truth.H[l] - est.h_hat[l]).squaredNorm();
  }
  if (e_true > 0.0) m.nmse = e_err / e_true;

  const auto total = truth.symbols.size();
  Eigen::Index wrong = 0;
  for (Eigen::Index u = 0; u < truth.symbols.rows(); ++u)
    for (Eigen::Index s = 0; s < truth.symbols.cols(); ++s)
      if (truth.symbols(u, s) != est.symbols_hat(u, s)) ++wrong;
  m.ser = total ? double(wrong) / double(total) : 0.0;
  return m;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ExperimentRecord run_trial(const Scenario& sc, std::uint64_t seed, const TrialOptions& opt) {
  const auto& cfg = sc.system;
  validate(cfg);
  validate(sc.algo);
  Rng rng(seed);
  const auto real = sample_paths(cfg, rng);
  const auto codes = gen_codes(cfg, rng);
  const auto& alphabet = cfg.symbols();
  std::uniform_int_distribution<int> pick(0, int(alphabet.size()) - 1);
  SymbolMatrix symbols(cfg.U, cfg.M);
  for (int u = 0; u < cfg.U; ++u)
    for (int s = 0; s < cfg.M; ++s) {
      const int m = pick(rng);
      symbols(u, s) = real.activity[u] ? alphabet[m] : cd(0.0);
    }
  const auto rx = synthesize_rx(real, codes, symbols, cfg, rng);

  ReceiverExtras extras;
  if (sc.algo.genie_symbols) extras.genie_symbols = &symbols;
  if (opt.trace_nmse) extras.truth_H = &rx.H.H;

  const auto t0 = std::chrono::steady_clock::now();
  auto res = run_receiver(rx.blocks, codes, cfg, sc.algo, extras);
  const auto t1 = std::chrono::steady_clock::now();

  ExperimentRecord rec;
  rec.seed = seed;
  rec.scenario = sc;
  rec.truth.activity = real.activity;
  rec.truth.symbols = symbols;
  rec.truth.H = rx.H.H;
  rec.est.activity_hat = res.post.activity_hat;
  rec.est.symbols_hat = res.post.symbols_hat;
  rec.est.h_hat = res.post.h_hat;
  rec.metrics = compute_metrics(rec.truth, rec.est);
  rec.converged = res.converged;
  rec.diverged = res.diverged;
  rec.iterations = res.iterations;
  rec.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  rec.sigma2_true = rx.sigma2;
  rec.sigma2_hat = res.hyper.sigma2;
  rec.w_hat = std::move(res.post.w_hat);
  rec.tau_w_post = std::move(res.post.tau_w_post);
  rec.tau_h_post = std::move(res.post.tau_h_post);
  rec.symbol_index = res.post.symbol_index;
  rec.p_post = std::move(res.post.p_post);
  rec.diagnostics = std::move(res.diagnostics);
  rec.has_posterior = true;
  return rec;
}

void write_record(const ExperimentRecord& rec, const fs::path& dir) {
  fs::create_directories(dir);
  const auto& cfg = rec.scenario.system;
  std::vector<Tensor> tensors;
  tensors.push_back(flags_tensor("activity", rec.truth.activity));
  tensors.push_back(symbols_tensor("symbols", rec.truth.symbols));
  tensors.push_back(stack_blocks("H", rec.truth.H));
  tensors.push_back(flags_tensor("activity_hat", rec.est.activity_hat));
  tensors.push_back(symbols_tensor("symbols_hat", rec.est.symbols_hat));
  tensors.push_back(stack_blocks("h_hat", rec.est.h_hat));
  if (rec.has_posterior) {
    tensors.push_back(stack_blocks("w_hat", rec.w_hat));
    tensors.push_back(stack_blocks("tau_w_post", rec.tau_w_post));
    tensors.push_back(stack_blocks("tau_h_post", rec.tau_h_post));
    std::vector<double> idx(std::size_t(rec.symbol_index.size()));
    for (Eigen::Index u = 0; u < rec.symbol_index.rows(); ++u)
      for (Eigen::Index s = 0; s < rec.symbol_index.cols(); ++s)
        idx[u * rec.symbol_index.cols() + s] = rec.symbol_index(u, s);
    tensors.push_back(real_tensor("symbol_index",
                                  {std::size_t(rec.symbol_index.rows()), std::size_t(rec.symbol_index.cols())},
                                  std::move(idx)));
    tensors.push_back(real_tensor("p_post",
                                  {std::size_t(cfg.U), std::size_t(cfg.M), cfg.symbols().size()},
                                  rec.p_post));
  }
  json manifest;
  manifest["seed"] = rec.seed;
  manifest["tensors"] = json::array();
  for (const auto& t : tensors) {
    const std::string file = t.name + ".tensor";
    write_tensor(dir / file, t);
    manifest["tensors"].push_back({{"name", t.name}, {"file", file}, {"dtype", t.dtype}, {"shape", t.shape}});
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";

  json j;
  j["seed"] = rec.seed;
  j["config"] = dump_scenario(rec.scenario);
  j["metrics"] = {{"aer", rec.metrics.aer},
                  {"nmse", rec.metrics.nmse ? json(*rec.metrics.nmse) : json(nullptr)},
                  {"ser", rec.metrics.ser}};
  j["converged"] = rec.converged;
  j["diverged"] = rec.diverged;
  j["iterations"] = rec.iterations;
  j["wall_time_s"] = rec.wall_time_s;
  j["sigma2_true"] = rec.sigma2_true;
  j["sigma2_hat"] = rec.sigma2_hat;
  j["diagnostics"] = json::array();
  for (const auto& d : rec.diagnostics)
    j["diagnostics"].push_back({{"iter", d.iter},
                                {"nmse_proxy", d.nmse_proxy},
                                {"residual", d.residual},
                                {"sigma2", d.sigma2},
                                {"converged", d.converged}});
  // Written last: its presence marks a complete record.
  const auto tmp = dir / "record.json.tmp";
  std::ofstream(tmp) << j.dump(2) << "\n";
  fs::rename(tmp, dir / "record.json");
}

std::optional<ExperimentRecord> read_record(const fs::path& dir, bool require_posterior) {
  try {
    std::ifstream in(dir / "record.json");
    if (!in) {
      warn(dir.string() + ": no record.json, skipped");
      return std::nullopt;
    }
    const json j = json::parse(in);
    ExperimentRecord rec;
    rec.seed = j.at("seed").get<std::uint64_t>();
    std::istringstream cfg_text(j.at("config").get<std::string>());
    rec.scenario = parse_scenario(cfg_text, (dir / "record.json").string());
    const auto& m = j.at("metrics");
    rec.metrics.aer = m.at("aer").get<double>();
    if (!m.at("nmse").is_null()) rec.metrics.nmse = m.at("nmse").get<double>();
    rec.metrics.ser = m.at("ser").get<double>();
    rec.converged = j.at("converged").get<bool>();
    rec.diverged = j.at("diverged").get<bool>();
    rec.iterations = j.at("iterations").get<int>();
    rec.wall_time_s = j.at("wall_time_s").get<double>();
    rec.sigma2_true = j.at("sigma2_true").get<double>();
    rec.sigma2_hat = j.at("sigma2_hat").get<double>();
    for (const auto& d : j.at("diagnostics")) {
      IterationDiag g;
      g.iter = d.at("iter").get<int>();
      g.nmse_proxy = d.at("nmse_proxy").get<double>();
      g.residual = d.at("residual").get<double>();
      g.sigma2 = d.at("sigma2").get<double>();
      g.converged = d.at("converged").get<bool>();
      rec.diagnostics.push_back(g);
    }

    std::ifstream min(dir / "manifest.json");
    const json manifest = json::parse(min);
    std::map<std::string, Tensor> t;
    for (const auto& e : manifest.at("tensors"))
      t[e.at("name").get<std::string>()] = read_tensor(dir / e.at("file").get<std::string>());
    rec.truth.activity = flags_from(t.at("activity"));
    rec.truth.symbols = symbols_from(t.at("symbols"));
    rec.truth.H = unstack_complex(t.at("H"));
    rec.est.activity_hat = flags_from(t.at("activity_hat"));
    rec.est.symbols_hat = symbols_from(t.at("symbols_hat"));
    rec.est.h_hat = unstack_complex(t.at("h_hat"));
    const bool post = t.count("w_hat") && t.count("tau_w_post") && t.count("tau_h_post") &&
                      t.count("symbol_index") && t.count("p_post");
    if (post) {
      rec.w_hat = unstack_complex(t.at("w_hat"));
      rec.tau_w_post = unstack_real(t.at("tau_w_post"));
      rec.tau_h_post = unstack_real(t.at("tau_h_post"));
      const auto& si = t.at("symbol_index");
      rec.symbol_index.resize(Eigen::Index(si.shape.at(0)), Eigen::Index(si.shape.at(1)));
      for (Eigen::Index u = 0; u < rec.symbol_index.rows(); ++u)
        for (Eigen::Index s = 0; s < rec.symbol_index.cols(); ++s)
          rec.symbol_index(u, s) = int(std::lround(si.rdata[u * rec.symbol_index.cols() + s]));
      rec.p_post = t.at("p_post").rdata;
      rec.has_posterior = true;
    } else if (require_posterior) {
      warn(dir.string() + ": record lacks posterior tensors, skipped");
      return std::nullopt;
    }
    return rec;
  } catch (const std::exception& e) {
    warn(dir.string() + ": unreadable record (" + e.what() + "), skipped");
    return std::nullopt;
  }
}

OracleSuiteResult run_oracle_suite(std::uint64_t seed, int count) {
  OracleSuiteResult res;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(seed);
  auto pick = [&](std::initializer_list<int> v) {
    std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
    return *(v.begin() + d(rng));
  };
  for (int c = 0; c < count; ++c) {
    SystemConfig cfg;
    cfg.M = pick({4, 8});
    cfg.N = pick({2, 4});
    cfg.Q = pick({1, 2, 4});
    cfg.U = pick({1, 2, 3});
    cfg.P = pick({1, 2});
    cfg.Nz = pick({1, 2});
    cfg.Ny = pick({1, 2});
    cfg.p_lambda = 1.0;
    cfg.fractional_doppler = true;
    // Delays up to a few frames so taps wrap modulo M; the CP covers them.
    const int d_max = std::uniform_int_distribution<int>(cfg.M - 1, 3 * cfg.M)(rng);
    cfg.tau_max = d_max / (cfg.M * cfg.delta_f);
    cfg.Mcp = d_max + 1;
    cfg.snr_db = 10.0;
    validate(cfg);
    const auto real = sample_paths(cfg, rng);
    const auto codes = gen_codes(cfg, rng);
    const auto& alphabet = cfg.symbols();
    std::uniform_int_distribution<int> sym(0, int(alphabet.size()) - 1);
    SymbolMatrix symbols(cfg.U, cfg.M);
    for (int u = 0; u < cfg.U; ++u)
      for (int s = 0; s < cfg.M; ++s) symbols(u, s) = alphabet[sym(rng)];
    const auto rx = synthesize_rx(real, codes, symbols, cfg, rng, true);
    const auto ref = time_domain_oracle(real, codes, symbols, cfg);
    double err = 0.0, nrm = 0.0;
    for (int l = 0; l < cfg.M; ++l) {
      err += (rx.R[l] - ref[l]).squaredNorm();
      nrm += ref[l].squaredNorm();
    }
    const double rel = nrm > 0.0 ? std::sqrt(err / nrm) : std::sqrt(err);
    res.cases.push_back({cfg, rel});
    res.max_rel_error = std::max(res.max_rel_error, rel);
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

Scenario scenario_at(const Scenario& base, const std::string& axis, double value) {
  Scenario sc = base;
  if (axis == "Q") {
    if (value != std::round(value)) throw ConfigError("sweep axis Q needs integer values");
    set_value(sc, "system.Q", std::to_string(std::llround(value)));
  } else if (axis == "snr_db" || axis == "p_lambda") {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    set_value(sc, "system." + axis, buf);
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "' (expected snr_db, Q or p_lambda)");
  }
  return sc;
}

SweepResult run_sweep(const SweepSpec& spec, const fs::path* records_dir) {
  if (spec.values.empty()) throw ConfigError("sweep needs at least one value");
  if (spec.trials < 1) throw ConfigError("sweep needs trials >= 1");
  std::vector<Scenario> points;
  for (double v : spec.values) {
    points.push_back(scenario_at(spec.base, spec.axis, v));
    validate(points.back().system);
    validate(points.back().algo);
  }
  SweepResult res;
  res.records.assign(points.size(), std::vector<ExperimentRecord>(spec.trials));
  const std::size_t tasks = points.size() * std::size_t(spec.trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&]() {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks) return;
      const std::size_t p = k / spec.trials, t = k % spec.trials;
      const auto seed = derive_seed(spec.seed, t);
      try {
        std::optional<ExperimentRecord> rec;
        fs::path dir;
        if (records_dir) {
          dir = *records_dir / (spec.axis + "_" + fmt_g(spec.values[p])) / ("trial_" + std::to_string(seed));
          if (fs::exists(dir / "record.json")) rec = read_record(dir, false);
        }
        if (!rec) {
          rec = run_trial(points[p], seed);
          if (records_dir) write_record(*rec, dir);
        }
        res.records[p][t] = std::move(*rec);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = tasks;
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(spec.jobs, int(tasks)));
  std::vector<std::thread> pool;
  for (int i = 1; i < jobs; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  for (std::size_t p = 0; p < points.size(); ++p) {
    auto rows = summarize(spec.values[p], res.records[p]);
    res.rows.insert(res.rows.end(), rows.begin(), rows.end());
  }
  return res;
}

std::vector<SummaryRow> summarize(double axis_value, const std::vector<ExperimentRecord>& recs) {
  std::vector<SummaryRow> rows;
  auto add = [&](const std::string& name, std::vector<double> v) {
    // Sorted accumulation keeps the summary independent of record order.
    std::sort(v.begin(), v.end());
    SummaryRow r;
    r.axis_value = axis_value;
    r.metric = name;
    r.trials = int(v.size());
    if (!v.empty()) {
      double s = 0.0;
      for (double x : v) s += x;
      r.mean = s / double(v.size());
      if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - r.mean) * (x - r.mean);
        r.stderr_ = std::sqrt(ss / double(v.size() - 1)) / std::sqrt(double(v.size()));
      }
    } else {
      r.mean = std::nan("");
    }
    rows.push_back(r);
  };
  std::vector<double> aer, nmse, ser, iters;
  for (const auto& r : recs) {
    aer.push_back(r.metrics.aer);
    if (r.metrics.nmse) nmse.push_back(*r.metrics.nmse);
    ser.push_back(r.metrics.ser);
    iters.push_back(r.iterations);
  }
  add("aer", aer);
  add("nmse", nmse);
  add("ser", ser);
  add("iterations", iters);
  return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << "axis_value,metric,mean,stderr,trials\n";
  for (const auto& r : rows)
    out << fmt_g(r.axis_value) << "," << r.metric << "," << fmt_g(r.mean) << "," << fmt_g(r.stderr_)
        << "," << r.trials << "\n";
}

DatasetReport export_dataset(const std::vector<ExperimentRecord>& records, const DatasetSplit& split,
                             std::uint64_t seed, const fs::path& out_dir) {
  if (!(split.train >= 0 && split.val >= 0 && split.test >= 0) ||
      !(split.train + split.val + split.test > 0))
    throw ConfigError("split fractions must be non-negative with a positive sum");
  DatasetReport rep;
  struct Item {
    std::size_t rec;
    int u, l;
  };
  std::vector<Item> items;
  int N = -1, Na = -1, M = -1;
  std::vector<cd> alphabet;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    const auto& cfg = rec.scenario.system;
    if (!rec.has_posterior) {
      warn("record " + std::to_string(rec.seed) + " lacks posterior tensors, skipped");
      ++rep.skipped_records;
      continue;
    }
    if (N < 0) {
      N = cfg.N;
      Na = cfg.Na();
      M = cfg.M;
      alphabet = cfg.symbols();
    } else if (cfg.N != N || cfg.Na() != Na || cfg.M != M || cfg.symbols() != alphabet) {
      warn("record " + std::to_string(rec.seed) + " has different dimensions, skipped");
      ++rep.skipped_records;
      continue;
    }
    for (int u = 0; u < cfg.U; ++u)
      if (rec.truth.activity[u] && rec.est.activity_hat[u])
        for (int l = 0; l < M; ++l) items.push_back({r, u, l});
  }

  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const double total = split.train + split.val + split.test;
  const std::size_t n = items.size();
  std::size_t n_train = std::size_t(std::llround(double(n) * split.train / total));
  std::size_t n_val = std::size_t(std::llround(double(n) * split.val / total));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);
  const std::size_t n_test = n - n_train - n_val;
  rep.train = n_train;
  rep.val = n_val;
  rep.test = n_test;

  fs::create_directories(out_dir);
  json manifest;
  manifest["format"] = "otfsra-dataset-1";
  manifest["N"] = N < 0 ? 0 : N;
  manifest["Na"] = Na < 0 ? 0 : Na;
  manifest["M"] = M < 0 ? 0 : M;
  manifest["alphabet"] = json::array();
  for (const auto& a : alphabet) manifest["alphabet"].push_back({a.real(), a.imag()});
  manifest["input_layout"] = "[item, i, j, c]; c in [0,4M): W, tau_w, H, tau_h slices, slice lh holds block (lh, u, (lh-l) mod M)";

  const std::size_t bounds[4] = {0, n_train, n_train + n_val, n};
  const char* names[3] = {"train", "val", "test"};
  const std::size_t A = alphabet.size();
  for (int sp = 0; sp < 3; ++sp) {
    const std::size_t cnt = bounds[sp + 1] - bounds[sp];
    const std::size_t NM = N < 0 ? 0 : std::size_t(N), NA = Na < 0 ? 0 : std::size_t(Na),
                      C = M < 0 ? 0 : 4 * std::size_t(M);
    std::vector<cd> in(cnt * NM * NA * C);
    std::vector<double> target(cnt * A, 0.0), pred(cnt, -1.0);
    json listing = json::array();
    for (std::size_t k = 0; k < cnt; ++k) {
      const auto& it = items[order[bounds[sp] + k]];
      const auto& rec = records[it.rec];
      for (int lh = 0; lh < M; ++lh) {
        const int lp = ((lh - it.l) % M + M) % M;
        const std::size_t v0 = (std::size_t(it.u) * M + lp) * N;
        for (int i = 0; i < N; ++i)
          for (int j = 0; j < Na; ++j) {
            const std::size_t base = ((k * NM + i) * NA + j) * C;
            in[base + lh] = rec.w_hat[lh](v0 + i, j);
            in[base + M + lh] = rec.tau_w_post[lh](v0 + i, j);
            in[base + 2 * M + lh] = rec.est.h_hat[lh](v0 + i, j);
            in[base + 3 * M + lh] = rec.tau_h_post[lh](v0 + i, j);
          }
      }
      target[k * A + nearest_symbol(rec.truth.symbols(it.u, it.l), alphabet)] = 1.0;
      pred[k] = rec.symbol_index(it.u, it.l);
      listing.push_back({{"seed", rec.seed}, {"u", it.u}, {"l", it.l}});
    }
    const std::string s = names[sp];
    write_tensor(out_dir / (s + "_inputs.tensor"), complex_tensor(s + "_inputs", {cnt, NM, NA, C}, std::move(in)));
    write_tensor(out_dir / (s + "_targets.tensor"), real_tensor(s + "_targets", {cnt, A}, std::move(target)));
    write_tensor(out_dir / (s + "_map_pred.tensor"), real_tensor(s + "_map_pred", {cnt}, std::move(pred)));
    manifest["splits"][s] = {{"count", cnt},
                             {"inputs", s + "_inputs.tensor"},
                             {"targets", s + "_targets.tensor"},
                             {"map_pred", s + "_map_pred.tensor"},
                             {"items", listing}};
  }
  std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << "\n";
  return rep;
}

}  // namespace otfsra
