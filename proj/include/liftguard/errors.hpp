// Copyright 2026 The liftguard Authors
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

#include <stdexcept>
#include <string>

namespace liftguard {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent matrix shapes, bad schedule offsets, wrong-size input blocks.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Nominal dynamics with spectral radius >= 1.
class UnstableModelError : public Error {
 public:
  using Error::Error;
};

// Malformed model / plan / schedule documents.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A numerical invariant that should hold by construction failed at tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Thresholds requested for a plant or mode where they are not defined.
class ThresholdError : public Error {
 public:
  using Error::Error;
};

}  // namespace liftguard
