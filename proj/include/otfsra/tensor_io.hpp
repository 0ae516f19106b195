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
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "otfsra/config.hpp"

namespace otfsra {

// On disk: one JSON line {"name", "dtype", "shape"} then the payload, row-major,
// little-endian float64 ("float64") or interleaved re/im float64 ("complex128").
struct Tensor {
  std::string name;
  std::string dtype = "complex128";
  std::vector<std::size_t> shape;
  std::vector<cd> cdata;
  std::vector<double> rdata;

  std::size_t size() const;
  bool is_complex() const { return dtype == "complex128"; }
};

Tensor complex_tensor(std::string name, std::vector<std::size_t> shape, std::vector<cd> data);
Tensor real_tensor(std::string name, std::vector<std::size_t> shape, std::vector<double> data);

// Stacks per-l blocks (rows x cols each) into shape [L, rows, cols].
Tensor stack_blocks(std::string name, const std::vector<Eigen::MatrixXcd>& blocks);
Tensor stack_blocks(std::string name, const std::vector<Eigen::MatrixXd>& blocks);
std::vector<Eigen::MatrixXcd> unstack_complex(const Tensor& t);
std::vector<Eigen::MatrixXd> unstack_real(const Tensor& t);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

}  // namespace otfsra
