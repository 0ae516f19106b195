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

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "otfsra/config.hpp"
#include "otfsra/harness.hpp"

namespace py = pybind11;
using namespace otfsra;

namespace {

Scenario scenario_from(const std::string& config_text, const std::vector<std::string>& overrides) {
  Scenario sc;
  if (!config_text.empty()) {
    std::istringstream in(config_text);
    sc = parse_scenario(in, "<string>");
  }
  for (const auto& o : overrides) apply_override(sc, o);
  validate(sc.system);
  validate(sc.algo);
  return sc;
}

py::array_t<cd> stacked(const std::vector<Eigen::MatrixXcd>& blocks) {
  const py::ssize_t L = py::ssize_t(blocks.size());
  const py::ssize_t R = L ? blocks[0].rows() : 0, C = L ? blocks[0].cols() : 0;
  py::array_t<cd> out({L, R, C});
  auto v = out.mutable_unchecked<3>();
  for (py::ssize_t l = 0; l < L; ++l)
    for (py::ssize_t i = 0; i < R; ++i)
      for (py::ssize_t j = 0; j < C; ++j) v(l, i, j) = blocks[l](i, j);
  return out;
}

py::array_t<cd> matrix(const Eigen::MatrixXcd& m) {
  py::array_t<cd> out({py::ssize_t(m.rows()), py::ssize_t(m.cols())});
  auto v = out.mutable_unchecked<2>();
  for (py::ssize_t i = 0; i < m.rows(); ++i)
    for (py::ssize_t j = 0; j < m.cols(); ++j) v(i, j) = m(i, j);
  return out;
}

py::dict trial(const std::string& config_text, const std::vector<std::string>& overrides,
               std::uint64_t seed) {
  ExperimentRecord rec;
  {
    py::gil_scoped_release release;
    rec = run_trial(scenario_from(config_text, overrides), seed);
  }
  py::dict d;
  d["seed"] = rec.seed;
  d["aer"] = rec.metrics.aer;
  d["nmse"] = rec.metrics.nmse ? py::cast(*rec.metrics.nmse) : py::none();
  d["ser"] = rec.metrics.ser;
  d["iterations"] = rec.iterations;
  d["converged"] = rec.converged;
  d["diverged"] = rec.diverged;
  d["sigma2_true"] = rec.sigma2_true;
  d["sigma2_hat"] = rec.sigma2_hat;
  d["activity"] = rec.truth.activity;
  d["activity_hat"] = rec.est.activity_hat;
  d["symbols"] = matrix(rec.truth.symbols);
  d["symbols_hat"] = matrix(rec.est.symbols_hat);
  d["H"] = stacked(rec.truth.H);
  d["h_hat"] = stacked(rec.est.h_hat);
  d["w_hat"] = stacked(rec.w_hat);
  d["config"] = dump_scenario(rec.scenario);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "OTFS grant-free random access simulator core";
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("run_trial", &trial, py::arg("config_text") = "", py::arg("overrides") = std::vector<std::string>{},
        py::arg("seed") = 1, "Run one trial and return truth, estimates and metrics.");
  m.def("save_trial",
        [](const std::string& config_text, const std::vector<std::string>& overrides, std::uint64_t seed,
           const std::filesystem::path& dir) {
          py::gil_scoped_release release;
          write_record(run_trial(scenario_from(config_text, overrides), seed), dir);
        },
        py::arg("config_text"), py::arg("overrides"), py::arg("seed"), py::arg("dir"),
        "Run one trial and store its record directory.");
  m.def("export_dataset",
        [](const std::vector<std::filesystem::path>& dirs, double train, double val, double test,
           std::uint64_t seed, const std::filesystem::path& out) {
          std::vector<ExperimentRecord> recs;
          for (const auto& d : dirs)
            if (auto r = read_record(d, false)) recs.push_back(std::move(*r));
          const auto rep = export_dataset(recs, {train, val, test}, seed, out);
          return py::dict(py::arg("train") = rep.train, py::arg("val") = rep.val, py::arg("test") = rep.test,
                          py::arg("skipped_records") = rep.skipped_records);
        },
        py::arg("record_dirs"), py::arg("train") = 0.8, py::arg("val") = 0.1, py::arg("test") = 0.1,
        py::arg("seed") = 1, py::arg("out"));
  m.def("oracle_check", [](std::uint64_t seed, int count) { return run_oracle_suite(seed, count).max_rel_error; },
        py::arg("seed") = 1, py::arg("count") = 20,
        "Largest relative error between the delay-Doppler model and the sample-level chain.");
  m.def("derive_seed", &derive_seed);
  m.def("schema_help", &schema_help);
}
