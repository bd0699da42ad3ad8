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

#ifndef XNPF_BENCH_EXPERIMENT_HPP
#define XNPF_BENCH_EXPERIMENT_HPP

#include <xnpf/bench/config.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace xnpf::bench {

/// Bins of the per-run weight histogram, equal width over [0, 1].
inline constexpr std::size_t kWeightHistogramBins = 10;

struct RunMetrics {
  std::uint64_t seed = 0;
  Index particles = 0;
  double rmse_tsum = 0.0;
  double rmse_v = 0.0;
  /// Pre-resampling effective sample size at every step.
  std::vector<double> ess_trace;
  /// Pooled counts of every normalized pre-resampling weight of the run.
  std::vector<std::size_t> weight_histogram;
  std::size_t eval_count = 0;
  double wall_time = 0.0;
  bool failed = false;
  std::string failure;

  /// Median of ess_trace / particles; zero for a failed run.
  [[nodiscard]] double median_ess_fraction() const;
  [[nodiscard]] double mean_ess_fraction() const;
};

/// Seed of run r, derived from the master seed.
std::uint64_t run_seed(std::uint64_t master_seed, int run);

/// The synthetic data of a run: per-run truth unless the config asks for a fixed one.
hiv::Trajectory experiment_truth(const ExperimentConfig& cfg, std::uint64_t seed);

/// Filters one trajectory. Weight collapse and numerical failures are reported in the result.
RunMetrics run_filter(const ExperimentConfig& cfg, const hiv::Trajectory& truth, std::uint64_t seed);

/// Every run of the experiment, in run order. Runs are independent and may use several threads;
/// the result does not depend on the thread count.
std::vector<RunMetrics> run_filter_experiment(const ExperimentConfig& cfg);

struct Summary {
  std::size_t runs = 0;
  std::size_t failed_runs = 0;
  double rmse_tsum_mean = 0.0;
  double rmse_tsum_std = 0.0;
  double rmse_v_mean = 0.0;
  double rmse_v_std = 0.0;
  double eval_count_mean = 0.0;
  double ess_fraction_mean = 0.0;
  /// Median over successful runs of each run's median ESS fraction.
  double ess_fraction_median = 0.0;
  /// Only one successful run; the standard deviations are reported as zero.
  bool single_run = false;
};

/// Means and sample standard deviations over the successful runs. Throws NoSuccessfulRuns.
Summary aggregate_metrics(const std::vector<RunMetrics>& runs);

enum class SweepParameter { kParticles, kPartition };

std::string_view to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view name);

struct SweepSpec {
  SweepParameter parameter = SweepParameter::kParticles;
  std::vector<double> values;
  int runs = 10;

  void validate() const;
};

struct SweepRow {
  double value = 0.0;
  /// False when every run at this value failed; the summary then holds only the counts.
  bool ok = true;
  Summary summary;
};

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const ExperimentConfig& base);

/// Protocol of the BPF vs xNPF comparison: bootstrap N=100 with multinomial resampling, xNPF
/// N=25, partition 0.3, 5 xNES iterations of population 15 with SUS, both on the same data.
ExperimentConfig comparison_config(const ExperimentConfig& base, FilterKind kind);

struct ComparisonEntry {
  ExperimentConfig config;
  std::vector<RunMetrics> runs;
};

struct Comparison {
  ComparisonEntry bootstrap;
  ComparisonEntry xnpf;
};

Comparison run_comparison(const ExperimentConfig& base);

}  // namespace xnpf::bench

#endif
