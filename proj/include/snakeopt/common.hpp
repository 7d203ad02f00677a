// Copyright 2026 The snakeopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace snakeopt {

/// Index of a gate frequency variable. Idle variables come first (one per
/// qubit, in qubit order), followed by one interaction variable per coupler.
using VarId = std::int32_t;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed, missing or inconsistent input data (files, ids, schemas).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure could not produce a result (empty bounds,
/// non-convergent fit, rank-deficient design, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Frequency quantum used for every optimization grid, in GHz (2 MHz).
inline constexpr double kGridStepGhz = 0.002;

/// Snaps a frequency to the nearest multiple of `step`. Values are rebuilt as
/// `k * step` so that snapped values are bit-identical however they were
/// obtained (computed, parsed from 6-decimal text, ...).
double snap_to_grid(double ghz, double step = kGridStepGhz);

}  // namespace snakeopt
