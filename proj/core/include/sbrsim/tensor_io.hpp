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

#pragma once

#include <filesystem>
#include <iosfwd>

#include "sbrsim/codec.hpp"

namespace sbrsim {

// SBT1: magic "SBT1", u32 precision, u32 ndims, u32 dims[ndims], then
// i32 values in row-major order. Little-endian throughout.
void write_sbt1(std::ostream& out, const QuantTensor& tensor);
QuantTensor read_sbt1(std::istream& in);

void save_tensor(const std::filesystem::path& path, const QuantTensor& tensor);
QuantTensor load_tensor(const std::filesystem::path& path);

}  // namespace sbrsim
