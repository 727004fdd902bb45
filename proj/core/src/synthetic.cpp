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

#include "sbrsim/synthetic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sbrsim/error.hpp"

namespace sbrsim {

std::string_view to_string(Distribution d) { return d == Distribution::Laplace ? "laplace" : "gaussian"; }

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::None: return "none";
    case Activation::Relu: return "relu";
    case Activation::LeakyRelu: return "leaky_relu";
    case Activation::Elu: return "elu";
  }
  return "?";
}

Distribution parse_distribution(std::string_view text) {
  if (text == "laplace") return Distribution::Laplace;
  if (text == "gaussian" || text == "normal") return Distribution::Gaussian;
  throw FormatError(fmt::format("unknown distribution '{}'", text));
}

Activation parse_activation(std::string_view text) {
  if (text == "none") return Activation::None;
  if (text == "relu") return Activation::Relu;
  if (text == "leaky_relu" || text == "leaky") return Activation::LeakyRelu;
  if (text == "elu") return Activation::Elu;
  throw FormatError(fmt::format("unknown activation '{}'", text));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  // splitmix64 over the mixed words
  std::uint64_t x = seed;
  for (std::uint64_t v : {a, b, c}) {
    x ^= v + 0x9E3779B97F4A7C15ull + (x << 6) + (x >> 2);
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    x ^= x >> 31;
  }
  return x;
}

namespace {

// The standard distributions are implementation-defined; these transforms
// keep tensors identical across standard libraries.
double uniform_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double activate(Activation a, double x) {
  switch (a) {
    case Activation::None: return x;
    case Activation::Relu: return x > 0 ? x : 0.0;
    case Activation::LeakyRelu: return x > 0 ? x : 0.1 * x;
    case Activation::Elu: return x > 0 ? x : std::expm1(x);
  }
  return x;
}

}  // namespace

std::vector<double> sample_activations(const SyntheticSpec& spec, std::size_t count,
                                       std::uint64_t seed) {
  if (!(spec.spread > 0)) throw RangeError("distribution spread must be positive");
  std::mt19937_64 rng(seed);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    double x = 0.0;
    if (spec.distribution == Distribution::Laplace) {
      const double u = uniform_open(rng) - 0.5;
      x = -spec.spread * std::copysign(std::log1p(-2.0 * std::abs(u)), u);
    } else {
      const double u1 = uniform_open(rng);
      const double u2 = uniform_open(rng);
      x = spec.spread * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    out[i] = activate(spec.activation, x + spec.bias);
  }
  return out;
}

QuantTensor generate_synthetic_tensor(const SyntheticSpec& spec, std::vector<std::size_t> dims,
                                      int precision, std::uint64_t seed, SyntheticInfo* info) {
  if (precision < 2 || precision > QuantTensor::kMaxPrecision) {
    throw RangeError(fmt::format("precision {} unsupported for synthesis", precision));
  }
  const std::size_t count = element_count(dims);
  const std::vector<double> a = sample_activations(spec, count, seed);
  const double qmax = static_cast<double>(precision_max(precision));
  const double qmin = static_cast<double>(precision_min(precision));
  const int cal_precision = spec.calibration_precision.value_or(precision);
  if (cal_precision < 2 || cal_precision > QuantTensor::kMaxPrecision) {
    throw RangeError(fmt::format("calibration precision {} unsupported", cal_precision));
  }
  const double cal_max = static_cast<double>(precision_max(cal_precision));

  std::vector<double> mags(count);
  std::transform(a.begin(), a.end(), mags.begin(), [](double v) { return std::abs(v); });
  std::sort(mags.begin(), mags.end());

  double scale = 1.0;
  if (count == 0) {
    scale = 1.0;
  } else if (spec.target_zero_fraction) {
    const double z = *spec.target_zero_fraction;
    if (!(z >= 0.0 && z < 1.0)) throw RangeError(fmt::format("target zero fraction {} outside [0, 1)", z));
    const std::size_t floor_zeros =
        static_cast<std::size_t>(std::upper_bound(mags.begin(), mags.end(), 0.0) - mags.begin());
    auto k = static_cast<std::size_t>(std::llround(z * static_cast<double>(count)));
    if (k < floor_zeros) {
      if (static_cast<double>(floor_zeros) / count > z + 0.02) {
        throw RangeError(fmt::format("target {:.3f} lies below the activation's zero floor {:.3f}",
                                     z, static_cast<double>(floor_zeros) / count));
      }
      k = floor_zeros;
    }
    if (k >= count) throw RangeError("target zero fraction leaves no nonzero values");
    // Threshold halfway between the k-th and (k+1)-th magnitudes: exactly k
    // values round to zero.
    const double lo = k == 0 ? 0.0 : mags[k - 1];
    const double t = 0.5 * (lo + mags[k]);
    if (!(t > 0)) throw RangeError("target zero fraction is not separable");
    scale = 0.5 / t;
    const double p999 = mags[std::min(count - 1, static_cast<std::size_t>(0.999 * (count - 1)))];
    if (std::round(p999 * scale) < 2.0) {
      throw RangeError(fmt::format("target {:.3f} leaves the tensor almost binary at {} bits", z,
                                   cal_precision));
    }
    const auto over = static_cast<std::size_t>(
        mags.end() - std::upper_bound(mags.begin(), mags.end(), (cal_max + 0.5) / scale));
    if (static_cast<double>(over) > 0.10 * static_cast<double>(count)) {
      throw RangeError(fmt::format("target {:.3f} saturates {:.2f}% of values at {} bits", z,
                                   100.0 * static_cast<double>(over) / count, cal_precision));
    }
    scale = std::ldexp(scale, precision - cal_precision);
  } else {
    const double top = mags.back();
    scale = top > 0 ? std::ldexp(cal_max / top, precision - cal_precision) : 1.0;
  }

  std::vector<std::int64_t> values(count);
  std::size_t zeros = 0, saturated = 0;
  for (std::size_t i = 0; i < count; ++i) {
    double q = std::round(a[i] * scale);
    if (q > qmax || q < qmin) {
      ++saturated;
      q = std::clamp(q, qmin, qmax);
    }
    values[i] = static_cast<std::int64_t>(q);
    zeros += values[i] == 0;
  }
  const double sat = count ? static_cast<double>(saturated) / count : 0.0;
  if (info) {
    info->scale = scale;
    info->zero_fraction = count ? static_cast<double>(zeros) / count : 0.0;
    info->saturated_fraction = sat;
  }
  return QuantTensor(std::move(dims), precision, std::move(values));
}

}  // namespace sbrsim
