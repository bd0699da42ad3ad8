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

#include <xnpf/bench/experiment.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

namespace xnpf::bench {

namespace {

double median(std::vector<double> values) {
  if (values.empty()) {
    return 0.0;
  }
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) {
    return *mid;
  }
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

double mean(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) {
    return 0.0;
  }
  const double m = mean(values);
  double sum = 0.0;
  for (double v : values) {
    sum += (v - m) * (v - m);
  }
  return std::sqrt(sum / static_cast<double>(values.size() - 1));
}

void accumulate_histogram(const Vector<double>& weights, std::vector<std::size_t>& counts) {
  const auto bins = counts.size();
  for (Index i = 0; i < weights.size(); ++i) {
    const auto b = std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, weights(i)) * static_cast<double>(bins)));
    ++counts[b];
  }
}

}  // namespace

double RunMetrics::median_ess_fraction() const {
  if (failed || particles < 1) {
    return 0.0;
  }
  return median(ess_trace) / static_cast<double>(particles);
}

double RunMetrics::mean_ess_fraction() const {
  if (failed || particles < 1 || ess_trace.empty()) {
    return 0.0;
  }
  return mean(ess_trace) / static_cast<double>(particles);
}

std::uint64_t run_seed(std::uint64_t master_seed, int run) {
  return splitmix64(derive_seed(master_seed, "run") + static_cast<std::uint64_t>(run));
}

hiv::Trajectory experiment_truth(const ExperimentConfig& cfg, std::uint64_t seed) {
  const std::uint64_t source = cfg.fixed_truth ? cfg.master_seed : seed;
  Stream rng(derive_seed(source, "measurement"));
  return hiv::simulate_truth(cfg.model.params, cfg.model.schedule, cfg.model.noise, cfg.days, cfg.model.init.cells(),
                             rng, cfg.model.integration_step);
}

RunMetrics run_filter(const ExperimentConfig& cfg, const hiv::Trajectory& truth, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const XnpfConfig filter_cfg = cfg.filter_config();
  const hiv::FilterModel model = cfg.filter_model();

  RunMetrics out;
  out.seed = seed;
  out.particles = filter_cfg.particles;
  out.weight_histogram.assign(kWeightHistogramBins, 0);
  out.ess_trace.reserve(truth.size());

  FilterStreams streams(seed);
  try {
    Cloud cloud =
        hiv::initial_cloud(cfg.model.init.cells(), cfg.model.init.beta, cfg.model.spread, filter_cfg.particles, streams.init);
    std::vector<double> est_tsum, true_tsum, est_v, true_v;
    est_tsum.reserve(truth.size());
    est_v.reserve(truth.size());
    true_tsum.reserve(truth.size());
    true_v.reserve(truth.size());
    for (std::size_t t = 0; t < truth.size(); ++t) {
      const Vector<double> z = truth.observations[t];
      StepResult<double> step = filter_step(cfg.filter, cloud, z, model, filter_cfg, streams);
      out.eval_count += step.metrics.likelihood_evals;
      out.ess_trace.push_back(step.metrics.ess);
      accumulate_histogram(step.metrics.weights, out.weight_histogram);
      const Vector<double>& m = step.metrics.estimate;
      est_tsum.push_back(m(hiv::kT) + m(hiv::kTStar));
      est_v.push_back(m(hiv::kVirus));
      true_tsum.push_back(truth.states[t](hiv::kT) + truth.states[t](hiv::kTStar));
      true_v.push_back(truth.states[t](hiv::kVirus));
      cloud = std::move(step.cloud);
    }
    out.rmse_tsum = rmse_series(est_tsum, true_tsum);
    out.rmse_v = rmse_series(est_v, true_v);
    if (!std::isfinite(out.rmse_tsum) || !std::isfinite(out.rmse_v)) {
      throw NumericalFailure("non-finite state estimate");
    }
  } catch (const AllWeightsZero& e) {
    out.failed = true;
    out.failure = e.what();
  } catch (const NumericalFailure& e) {
    out.failed = true;
    out.failure = e.what();
  }
  if (out.failed) {
    out.rmse_tsum = std::numeric_limits<double>::quiet_NaN();
    out.rmse_v = std::numeric_limits<double>::quiet_NaN();
  }
  out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::vector<RunMetrics> run_filter_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto runs = static_cast<std::size_t>(cfg.runs);
  std::vector<RunMetrics> out(runs);
  std::vector<std::exception_ptr> errors(runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < runs; r = next++) {
      try {
        const std::uint64_t seed = run_seed(cfg.master_seed, static_cast<int>(r));
        out[r] = run_filter(cfg, experiment_truth(cfg, seed), seed);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), runs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) {
      pool.emplace_back(worker);
    }
    for (auto& th : pool) {
      th.join();
    }
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return out;
}

Summary aggregate_metrics(const std::vector<RunMetrics>& runs) {
  Summary s;
  s.runs = runs.size();
  std::vector<double> tsum, v, evals, ess_mean, ess_median;
  for (const RunMetrics& r : runs) {
    if (r.failed) {
      ++s.failed_runs;
      continue;
    }
    tsum.push_back(r.rmse_tsum);
    v.push_back(r.rmse_v);
    evals.push_back(static_cast<double>(r.eval_count));
    ess_mean.push_back(r.mean_ess_fraction());
    ess_median.push_back(r.median_ess_fraction());
  }
  if (tsum.empty()) {
    throw NoSuccessfulRuns();
  }
  s.rmse_tsum_mean = mean(tsum);
  s.rmse_tsum_std = sample_std(tsum);
  s.rmse_v_mean = mean(v);
  s.rmse_v_std = sample_std(v);
  s.eval_count_mean = mean(evals);
  s.ess_fraction_mean = mean(ess_mean);
  s.ess_fraction_median = median(ess_median);
  s.single_run = tsum.size() == 1;
  return s;
}

std::string_view to_string(SweepParameter p) { return p == SweepParameter::kParticles ? "particles" : "partition"; }

SweepParameter parse_sweep_parameter(std::string_view name) {
  if (name == "particles") {
    return SweepParameter::kParticles;
  }
  if (name == "partition") {
    return SweepParameter::kPartition;
  }
  throw ConfigError("unknown sweep parameter '" + std::string(name) + "'");
}

void SweepSpec::validate() const {
  if (values.empty()) {
    throw ConfigError("sweep requires at least one value");
  }
  if (runs < 1) {
    throw ConfigError("sweep requires at least one run per value");
  }
  for (double v : values) {
    if (parameter == SweepParameter::kParticles && !(v >= 1 && v == std::floor(v))) {
      throw ConfigError("particle counts must be positive integers");
    }
    if (parameter == SweepParameter::kPartition && !(v >= 0 && v <= 1)) {
      throw ConfigError("partition values must lie in [0, 1]");
    }
  }
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const ExperimentConfig& base) {
  spec.validate();
  std::vector<SweepRow> rows;
  rows.reserve(spec.values.size());
  for (double value : spec.values) {
    ExperimentConfig cfg = base;
    cfg.runs = spec.runs;
    if (spec.parameter == SweepParameter::kParticles) {
      cfg.xnpf.particles = static_cast<Index>(value);
    } else {
      cfg.xnpf.partition = value;
    }
    const std::vector<RunMetrics> runs = run_filter_experiment(cfg);
    SweepRow row;
    row.value = value;
    try {
      row.summary = aggregate_metrics(runs);
    } catch (const NoSuccessfulRuns&) {
      row.ok = false;
      row.summary.runs = runs.size();
      row.summary.failed_runs = runs.size();
    }
    rows.push_back(row);
  }
  return rows;
}

ExperimentConfig comparison_config(const ExperimentConfig& base, FilterKind kind) {
  ExperimentConfig cfg = base;
  cfg.filter = kind;
  if (kind == FilterKind::kBootstrap) {
    cfg.xnpf.particles = 100;
    cfg.resampler = ResampleScheme::kMultinomial;
  } else {
    cfg.xnpf.particles = 25;
    cfg.xnpf.partition = 0.3;
    cfg.xnpf.xnes.iterations = 5;
    cfg.xnpf.xnes.population = 15;
    cfg.resampler = ResampleScheme::kSus;
  }
  return cfg;
}

Comparison run_comparison(const ExperimentConfig& base) {
  Comparison out;
  out.bootstrap.config = comparison_config(base, FilterKind::kBootstrap);
  out.xnpf.config = comparison_config(base, FilterKind::kXnpf);
  out.bootstrap.runs = run_filter_experiment(out.bootstrap.config);
  out.xnpf.runs = run_filter_experiment(out.xnpf.config);
  return out;
}

}  // namespace xnpf::bench
