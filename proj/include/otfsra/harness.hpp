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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "otfsra/config.hpp"
#include "otfsra/modem.hpp"
#include "otfsra/receiver.hpp"

namespace otfsra {

struct TrialTruth {
  std::vector<int> activity;
  SymbolMatrix symbols;  // zero rows for inactive devices
  std::vector<Eigen::MatrixXcd> H;
};

struct TrialEstimates {
  std::vector<int> activity_hat;
  SymbolMatrix symbols_hat;  // zero rows for devices declared inactive
  std::vector<Eigen::MatrixXcd> h_hat;
};

struct Metrics {
  double aer = 0.0;
  std::optional<double> nmse;  // missing when the true channel has no energy
  double ser = 0.0;
};

Metrics compute_metrics(const TrialTruth& truth, const TrialEstimates& est);

struct ExperimentRecord {
  std::uint64_t seed = 0;
  Scenario scenario;
  TrialTruth truth;
  TrialEstimates est;
  Metrics metrics;
  bool converged = false;
  bool diverged = false;
  int iterations = 0;
  double wall_time_s = 0.0;
  double sigma2_true = 0.0;
  double sigma2_hat = 0.0;
  // Posterior pieces exported for the detector dataset.
  std::vector<Eigen::MatrixXcd> w_hat;
  std::vector<Eigen::MatrixXd> tau_w_post, tau_h_post;
  Eigen::MatrixXi symbol_index;
  std::vector<double> p_post;
  std::vector<IterationDiag> diagnostics;
  bool has_posterior = false;
};

struct TrialOptions {
  bool trace_nmse = false;  // per-iteration NMSE against the truth
};

ExperimentRecord run_trial(const Scenario& sc, std::uint64_t seed, const TrialOptions& opt = {});

// Per-trial seed derived from the sweep seed; identical across sweep points.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

void write_record(const ExperimentRecord& rec, const std::filesystem::path& dir);
// Returns nullopt (after a warning on stderr) when the directory is incomplete.
std::optional<ExperimentRecord> read_record(const std::filesystem::path& dir, bool require_posterior);

struct OracleCase {
  SystemConfig cfg;
  double rel_error = 0.0;
};

struct OracleSuiteResult {
  std::vector<OracleCase> cases;
  double max_rel_error = 0.0;
  double seconds = 0.0;
};

// Noiseless delay-Doppler synthesis against the sample-level oracle on random
// small configurations with fractional Doppler and integer delays.
OracleSuiteResult run_oracle_suite(std::uint64_t seed, int count);

struct SweepSpec {
  std::string axis = "snr_db";  // snr_db | Q | p_lambda
  std::vector<double> values;
  int trials = 1;
  Scenario base;
  int jobs = 1;
  std::uint64_t seed = 1;
};

struct SummaryRow {
  double axis_value = 0.0;
  std::string metric;
  double mean = 0.0;
  double stderr_ = 0.0;
  int trials = 0;
};

struct SweepResult {
  std::vector<SummaryRow> rows;
  // records[point][trial]
  std::vector<std::vector<ExperimentRecord>> records;
};

Scenario scenario_at(const Scenario& base, const std::string& axis, double value);

// Records are written below records_dir when given; existing ones are reused.
SweepResult run_sweep(const SweepSpec& spec, const std::filesystem::path* records_dir = nullptr);

std::vector<SummaryRow> summarize(double axis_value, const std::vector<ExperimentRecord>& recs);
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);

struct DatasetSplit {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct DatasetReport {
  std::size_t train = 0, val = 0, test = 0, skipped_records = 0;
};

DatasetReport export_dataset(const std::vector<ExperimentRecord>& records, const DatasetSplit& split,
                             std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace otfsra
