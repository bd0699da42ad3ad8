// Copyright 2026 The xnpf Authors
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

#ifndef XNPF_ERRORS_HPP
#define XNPF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace xnpf {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every importance weight vanished (or became non-finite). The filter has diverged.
class AllWeightsZero : public Error {
 public:
  AllWeightsZero() : Error("all particle weights are zero or non-finite") {}
};

class WeightsNotNormalized : public Error {
 public:
  WeightsNotNormalized() : Error("particle weights are not normalized") {}
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t lhs, std::size_t rhs)
      : Error("length mismatch: " + std::to_string(lhs) + " vs " + std::to_string(rhs)) {}
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NoSuccessfulRuns : public Error {
 public:
  NoSuccessfulRuns() : Error("no successful runs to aggregate") {}
};

}  // namespace xnpf

#endif
