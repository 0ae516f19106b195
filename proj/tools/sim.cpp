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

// sim: command-line driver for trials, sweeps, the oracle check and dataset export.

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "otfsra/config.hpp"
#include "otfsra/harness.hpp"

namespace fs = std::filesystem;
using namespace otfsra;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::string out;
};

Scenario load(const Common& c) {
  Scenario sc = c.config.empty() ? Scenario{} : load_scenario(c.config);
  for (const auto& o : c.overrides) apply_override(sc, o);
  validate(sc.system);
  validate(sc.algo);
  return sc;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size()) throw ConfigError("--values: bad number '" + item + "'");
    v.push_back(x);
  }
  if (v.empty()) throw ConfigError("--values: empty list");
  return v;
}

std::string fmt(double x) {
  char b[64];
  std::snprintf(b, sizeof b, "%.10g", x);
  return b;
}

void print_metrics(const ExperimentRecord& r) {
  std::cout << "seed=" << r.seed << " aer=" << fmt(r.metrics.aer)
            << " nmse=" << (r.metrics.nmse ? fmt(*r.metrics.nmse) : std::string("nan"))
            << " ser=" << fmt(r.metrics.ser) << " iterations=" << r.iterations
            << " converged=" << (r.converged ? 1 : 0) << " diverged=" << (r.diverged ? 1 : 0)
            << "\n";
}

std::vector<fs::path> record_dirs(const fs::path& root) {
  std::vector<fs::path> dirs;
  if (fs::exists(root / "record.json")) dirs.push_back(root);
  if (fs::is_directory(root))
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file() && e.path().filename() == "record.json" && e.path().parent_path() != root)
        dirs.push_back(e.path().parent_path());
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

int default_jobs() {
  if (const char* env = std::getenv("SIM_JOBS")) {
    const int j = std::atoi(env);
    if (j > 0) return j;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OTFS grant-free random access simulator"};
  app.footer(schema_help());
  app.require_subcommand(1);

  Common trial_opt, sweep_opt, export_opt;
  std::string axis = "snr_db", values, positional_cfg, records;
  int trials = 1, jobs = default_jobs(), oracle_count = 20;
  std::uint64_t oracle_seed = 1;
  double train = 0.8, val = 0.1, test = 0.1;

  auto add_common = [](CLI::App* s, Common& c) {
    s->add_option("--config", c.config, "Scenario file");
    s->add_option("--override", c.overrides, "section.key=value (repeatable)");
    s->add_option("--seed", c.seed, "Base seed");
    s->add_option("--out", c.out, "Output directory");
  };

  auto* trial = app.add_subcommand("trial", "Run one trial and print its metrics");
  add_common(trial, trial_opt);

  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over one axis; CSV summary");
  add_common(sweep, sweep_opt);
  sweep->add_option("--axis", axis, "snr_db | Q | p_lambda");
  sweep->add_option("--values", values, "Comma-separated axis values")->required();
  sweep->add_option("--trials", trials, "Trials per point")->check(CLI::PositiveNumber);
  sweep->add_option("--jobs", jobs, "Parallel trials (default: SIM_JOBS or 1)")->check(CLI::PositiveNumber);

  auto* oracle = app.add_subcommand("oracle-check", "Compare delay-Doppler synthesis with the sample-level oracle");
  oracle->add_option("--seed", oracle_seed, "Seed");
  oracle->add_option("--count", oracle_count, "Random configurations")->check(CLI::PositiveNumber);

  auto* exp = app.add_subcommand("export-dataset", "Build the detector dataset from stored records");
  add_common(exp, export_opt);
  exp->add_option("records", records, "Directory holding trial records")->required();
  exp->add_option("--train", train, "Train fraction");
  exp->add_option("--val", val, "Validation fraction");
  exp->add_option("--test", test, "Test fraction");

  auto* vc = app.add_subcommand("validate-config", "Parse and validate a scenario file");
  vc->add_option("file", positional_cfg, "Scenario file");
  vc->add_option("--config", positional_cfg, "Scenario file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*vc) {
      if (positional_cfg.empty()) throw ConfigError("validate-config: no file given");
      const Scenario sc = load_scenario(positional_cfg);
      validate(sc.system);
      validate(sc.algo);
      std::cout << positional_cfg << ": ok\n";
      return 0;
    }
    if (*oracle) {
      const auto res = run_oracle_suite(oracle_seed, oracle_count);
      for (std::size_t i = 0; i < res.cases.size(); ++i) {
        const auto& c = res.cases[i];
        std::cout << "case " << i << " M=" << c.cfg.M << " N=" << c.cfg.N << " Q=" << c.cfg.Q
                  << " U=" << c.cfg.U << " P=" << c.cfg.P << " Na=" << c.cfg.Na()
                  << " rel_error=" << fmt(c.rel_error) << "\n";
      }
      std::cout << "max relative error " << fmt(res.max_rel_error) << " over " << res.cases.size()
                << " configurations (" << fmt(res.seconds) << " s)\n";
      return res.max_rel_error < 1e-9 ? 0 : kExitRuntime;
    }
    if (*trial) {
      const Scenario sc = load(trial_opt);
      const auto rec = run_trial(sc, trial_opt.seed);
      print_metrics(rec);
      if (!trial_opt.out.empty()) write_record(rec, trial_opt.out);
      return 0;
    }
    if (*sweep) {
      SweepSpec spec;
      spec.base = load(sweep_opt);
      spec.axis = axis;
      spec.values = parse_values(values);
      spec.trials = trials;
      spec.jobs = jobs;
      spec.seed = sweep_opt.seed;
      SweepResult res;
      if (sweep_opt.out.empty()) {
        res = run_sweep(spec);
      } else {
        const fs::path out = sweep_opt.out;
        fs::create_directories(out);
        const fs::path recs = out / "records";
        res = run_sweep(spec, &recs);
        std::ofstream csv(out / "summary.csv");
        write_summary_csv(res.rows, csv);
      }
      write_summary_csv(res.rows, std::cout);
      return 0;
    }
    if (*exp) {
      if (export_opt.out.empty()) throw ConfigError("export-dataset: --out is required");
      std::vector<ExperimentRecord> recs;
      std::size_t unreadable = 0;
      for (const auto& d : record_dirs(records)) {
        if (auto r = read_record(d, false))
          recs.push_back(std::move(*r));
        else
          ++unreadable;
      }
      const auto rep = export_dataset(recs, {train, val, test}, export_opt.seed, export_opt.out);
      std::cout << "train=" << rep.train << " val=" << rep.val << " test=" << rep.test
                << " skipped_records=" << rep.skipped_records + unreadable << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
