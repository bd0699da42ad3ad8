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

#ifndef XNPF_BENCH_CONFIG_HPP
#define XNPF_BENCH_CONFIG_HPP

#include <xnpf/filter.hpp>
#include <xnpf/hiv/model.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

/**
 * \file
 * \brief Experiment configuration and its key-value file format.
 *
 * One `key = value` pair per line; `#` starts a comment. Keys are the dotted field paths of
 * ExperimentConfig (for example `xnpf.xnes.iterations` or `model.schedule.period`). Unknown or
 * repeated keys are errors; omitted keys keep their defaults.
 */

namespace xnpf::bench {

struct InitialState {
  double T = 1000.0;
  double T_star = 0.0;
  double v = 1e-3;
  /// Infection rate the filter's log-beta component is initialized around.
  double beta = 7.26e-06;

  [[nodiscard]] hiv::CellState cells() const { return {T, T_star, v}; }
  friend bool operator==(const InitialState&, const InitialState&) = default;
};

struct ModelConfig {
  hiv::Params params{};
  hiv::BetaSchedule schedule{};
  hiv::MeasurementNoise noise{};
  InitialState init{};
  hiv::InitialSpread spread{};
  /// Random-walk scale of the log-beta component.
  double log_beta_step = 0.05;
  /// RK4 inner step (days) for both the truth and the filter transition.
  double integration_step = 0.01;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct OutputPaths {
  std::string metrics;
  std::string table;
  std::string truth;

  friend bool operator==(const OutputPaths&, const OutputPaths&) = default;
};

struct ExperimentConfig {
  FilterKind filter = FilterKind::kXnpf;
  XnpfConfig xnpf{};
  /// Unset selects SUS for xNPF and multinomial for the bootstrap filter.
  std::optional<ResampleScheme> resampler;
  ModelConfig model{};
  int days = 190;
  int runs = 30;
  std::uint64_t master_seed = 1;
  /// Reuse a single truth realization (derived from the master seed) for every run.
  bool fixed_truth = false;
  int threads = 1;
  OutputPaths output{};

  /// Throws ConfigError if any field is outside its legal range.
  void validate() const;

  /// Filter settings with the resampler resolved for the configured filter kind.
  [[nodiscard]] XnpfConfig filter_config() const;

  /// The filter-side HIV model implied by this configuration.
  [[nodiscard]] hiv::FilterModel filter_model() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

/// Writes every key, doubles with 17 significant digits, so parse_config(write_config(c)) == c.
void write_config(std::ostream& out, const ExperimentConfig& cfg);

}  // namespace xnpf::bench

#endif
