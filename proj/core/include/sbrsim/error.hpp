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

#include <stdexcept>
#include <string>

namespace sbrsim {

/// Base class for every error raised by the simulator.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value, digit, or field does not fit its declared width or range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Tensor/layer geometry or stream shape is inconsistent.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Malformed binary file, text program, or config document.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid instruction sequence or core state at execution time.
class ProgramError : public Error {
 public:
  using Error::Error;
};

}  // namespace sbrsim
