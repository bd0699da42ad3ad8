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

#ifndef XNPF_BENCH_REPORT_HPP
#define XNPF_BENCH_REPORT_HPP

#include <xnpf/bench/experiment.hpp>

#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

/**
 * \file
 * \brief Machine-readable experiment outputs.
 *
 * metrics.json:
 *
 *   {"runs": [{"seed", "rmse_tsum", "rmse_v", "eval_count", "ess_trace": [...], "failed"}, ...],
 *    "summary": {"rmse_tsum_mean", "rmse_tsum_std", "rmse_v_mean", "rmse_v_std", "failed_runs"}}
 *
 * RMSE of a failed run is written as null. Wall-clock times are never written, so repeated
 * invocations produce identical files.
 */

namespace xnpf::bench {

void write_metrics_json(std::ostream& out, const std::vector<RunMetrics>& runs);
void write_metrics_json(const std::string& path, const std::vector<RunMetrics>& runs);

/// Runs read back from a metrics file. Only the persisted fields are populated.
std::vector<RunMetrics> read_metrics_json(std::istream& in);

void write_sweep_csv(std::ostream& out, SweepParameter parameter, const std::vector<SweepRow>& rows);

/// One row per filter of the comparison.
void write_comparison_csv(std::ostream& out, const Comparison& comparison);

/// Opens `path` for writing or throws ConfigError.
std::ofstream open_output(const std::string& path);

}  // namespace xnpf::bench

#endif
