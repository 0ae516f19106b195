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

#include "otfsra/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <type_traits>

#include <json.hpp>

namespace otfsra {

namespace {

static_assert(std::endian::native == std::endian::little, "tensor container assumes little-endian hosts");

std::size_t product(const std::vector<std::size_t>& s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
}

template <class Mat>
Tensor stack_impl(std::string name, const std::vector<Mat>& blocks, bool complex) {
  const std::size_t L = blocks.size();
  const std::size_t R = L ? std::size_t(blocks[0].rows()) : 0;
  const std::size_t C = L ? std::size_t(blocks[0].cols()) : 0;
  Tensor t;
  t.name = std::move(name);
  t.dtype = complex ? "complex128" : "float64";
  t.shape = {L, R, C};
  if (complex)
    t.cdata.resize(L * R * C);
  else
    t.rdata.resize(L * R * C);
  for (std::size_t l = 0; l < L; ++l) {
    if (std::size_t(blocks[l].rows()) != R || std::size_t(blocks[l].cols()) != C)
      throw std::invalid_argument("stack_blocks: ragged blocks");
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) {
        const std::size_t i = (l * R + r) * C + c;
        if constexpr (std::is_same_v<typename Mat::Scalar, cd>) {
          t.cdata[i] = blocks[l](r, c);
        } else {
          t.rdata[i] = blocks[l](r, c);
        }
      }
  }
  return t;
}

}  // namespace

std::size_t Tensor::size() const { return product(shape); }

Tensor complex_tensor(std::string name, std::vector<std::size_t> shape, std::vector<cd> data) {
  if (product(shape) != data.size()) throw std::invalid_argument("tensor shape/data mismatch");
  Tensor t;
  t.name = std::move(name);
  t.dtype = "complex128";
  t.shape = std::move(shape);
  t.cdata = std::move(data);
  return t;
}

Tensor real_tensor(std::string name, std::vector<std::size_t> shape, std::vector<double> data) {
  if (product(shape) != data.size()) throw std::invalid_argument("tensor shape/data mismatch");
  Tensor t;
  t.name = std::move(name);
  t.dtype = "float64";
  t.shape = std::move(shape);
  t.rdata = std::move(data);
  return t;
}

Tensor stack_blocks(std::string name, const std::vector<Eigen::MatrixXcd>& blocks) {
  return stack_impl(std::move(name), blocks, true);
}

Tensor stack_blocks(std::string name, const std::vector<Eigen::MatrixXd>& blocks) {
  return stack_impl(std::move(name), blocks, false);
}

std::vector<Eigen::MatrixXcd> unstack_complex(const Tensor& t) {
  if (t.shape.size() != 3 || !t.is_complex()) throw std::invalid_argument(t.name + ": expected complex [L,R,C]");
  const auto L = t.shape[0], R = t.shape[1], C = t.shape[2];
  std::vector<Eigen::MatrixXcd> out(L, Eigen::MatrixXcd(R, C));
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) out[l](r, c) = t.cdata[(l * R + r) * C + c];
  return out;
}

std::vector<Eigen::MatrixXd> unstack_real(const Tensor& t) {
  if (t.shape.size() != 3 || t.is_complex()) throw std::invalid_argument(t.name + ": expected real [L,R,C]");
  const auto L = t.shape[0], R = t.shape[1], C = t.shape[2];
  std::vector<Eigen::MatrixXd> out(L, Eigen::MatrixXd(R, C));
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t c = 0; c < C; ++c) out[l](r, c) = t.rdata[(l * R + r) * C + c];
  return out;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  if (t.dtype != "complex128" && t.dtype != "float64")
    throw std::invalid_argument("unsupported dtype " + t.dtype);
  const std::size_t n = t.size();
  if ((t.is_complex() ? t.cdata.size() : t.rdata.size()) != n)
    throw std::invalid_argument(t.name + ": payload does not match shape");
  nlohmann::json h;
  h["name"] = t.name;
  h["dtype"] = t.dtype;
  h["shape"] = t.shape;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << h.dump() << '\n';
  if (t.is_complex())
    out.write(reinterpret_cast<const char*>(t.cdata.data()), std::streamsize(n * sizeof(cd)));
  else
    out.write(reinterpret_cast<const char*>(t.rdata.data()), std::streamsize(n * sizeof(double)));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error(path.string() + ": missing header");
  Tensor t;
  try {
    const auto h = nlohmann::json::parse(header);
    t.name = h.at("name").get<std::string>();
    t.dtype = h.at("dtype").get<std::string>();
    t.shape = h.at("shape").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": bad header: " + e.what());
  }
  const std::size_t n = t.size();
  if (t.dtype == "complex128") {
    t.cdata.resize(n);
    in.read(reinterpret_cast<char*>(t.cdata.data()), std::streamsize(n * sizeof(cd)));
  } else if (t.dtype == "float64") {
    t.rdata.resize(n);
    in.read(reinterpret_cast<char*>(t.rdata.data()), std::streamsize(n * sizeof(double)));
  } else {
    throw std::runtime_error(path.string() + ": unsupported dtype " + t.dtype);
  }
  if (!in) throw std::runtime_error(path.string() + ": truncated payload");
  return t;
}

}  // namespace otfsra
