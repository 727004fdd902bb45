/*
 * Copyright 2026 The sbrsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "sbrsim/tensor_io.hpp"

#include <fmt/format.h>

#include <array>
#include <fstream>
#include <limits>
#include <string_view>

#include "sbrsim/error.hpp"

namespace sbrsim {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                              static_cast<char>((v >> 16) & 0xFF),
                              static_cast<char>((v >> 24) & 0xFF)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw FormatError(fmt::format("SBT1 truncated in {}", what));
  }
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

constexpr int kMaxFilePrecision = 32;
constexpr std::uint32_t kMaxDims = 16;

}  // namespace

void write_sbt1(std::ostream& out, const QuantTensor& t) {
  if (t.precision() > kMaxFilePrecision) {
    throw RangeError(fmt::format("SBT1 stores 32-bit values, precision {} is too wide",
                                 t.precision()));
  }
  for (auto v : t.values()) {
    if (!fits_precision(v, t.precision())) {
      throw RangeError(fmt::format("value {} exceeds precision {}", v, t.precision()));
    }
  }
  out.write("SBT1", 4);
  put_u32(out, static_cast<std::uint32_t>(t.precision()));
  put_u32(out, static_cast<std::uint32_t>(t.dims().size()));
  for (auto d : t.dims()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw RangeError("dimension exceeds u32");
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  for (auto v : t.values()) put_u32(out, static_cast<std::uint32_t>(static_cast<std::int32_t>(v)));
  if (!out) throw FormatError("failed writing SBT1 stream");
}

QuantTensor read_sbt1(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || std::string_view(magic.data(), 4) != "SBT1") {
    throw FormatError("bad SBT1 magic");
  }
  const std::uint32_t p = get_u32(in, "precision");
  if (p < 1 || p > kMaxFilePrecision) throw FormatError(fmt::format("bad precision {}", p));
  const std::uint32_t ndims = get_u32(in, "ndims");
  if (ndims > kMaxDims) throw FormatError(fmt::format("{} dims is more than supported", ndims));
  std::vector<std::size_t> dims(ndims);
  for (auto& d : dims) d = get_u32(in, "dims");
  const std::size_t count = element_count(dims);
  std::vector<std::int64_t> values;
  values.reserve(std::min<std::size_t>(count, std::size_t{1} << 24));
  for (std::size_t i = 0; i < count; ++i) {
    const auto v = static_cast<std::int32_t>(get_u32(in, "values"));
    if (!fits_precision(v, static_cast<int>(p))) {
      throw RangeError(fmt::format("value {} at index {} exceeds precision {}", v, i, p));
    }
    values.push_back(v);
  }
  return QuantTensor(std::move(dims), static_cast<int>(p), std::move(values));
}

void save_tensor(const std::filesystem::path& path, const QuantTensor& tensor) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  write_sbt1(out, tensor);
}

QuantTensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  return read_sbt1(in);
}

}  // namespace sbrsim
