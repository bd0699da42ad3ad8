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

#include <xnpf/bench/report.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

namespace xnpf::bench {

namespace {

using nlohmann::json;

json number_or_null(double value) { return std::isfinite(value) ? json(value) : json(nullptr); }

std::string fmt(double value) {
  if (!std::isfinite(value)) {
    return "nan";
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

double json_real(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

void write_summary_columns(std::ostream& out, const Summary& s, bool ok) {
  out << s.runs << ',' << s.failed_runs << ',';
  if (ok) {
    out << fmt(s.rmse_tsum_mean) << ',' << fmt(s.rmse_tsum_std) << ',' << fmt(s.rmse_v_mean) << ','
        << fmt(s.rmse_v_std) << ',' << fmt(s.ess_fraction_mean) << ',' << fmt(s.ess_fraction_median) << ','
        << fmt(s.eval_count_mean);
  } else {
    out << "nan,nan,nan,nan,nan,nan,nan";
  }
}

constexpr const char* kSummaryHeader =
    "runs,failed_runs,rmse_tsum_mean,rmse_tsum_std,rmse_v_mean,rmse_v_std,ess_fraction_mean,ess_fraction_median,"
    "eval_count_mean";

void write_entry(std::ostream& out, const ComparisonEntry& entry) {
  const XnpfConfig cfg = entry.config.filter_config();
  out << to_string(entry.config.filter) << ',' << cfg.particles << ',' << fmt(cfg.partition) << ','
      << cfg.xnes.iterations << ',' << cfg.xnes.resolved(4).population << ',' << to_string(cfg.resampler) << ',';
  Summary s;
  bool ok = true;
  try {
    s = aggregate_metrics(entry.runs);
  } catch (const NoSuccessfulRuns&) {
    ok = false;
    s.runs = entry.runs.size();
    s.failed_runs = entry.runs.size();
  }
  write_summary_columns(out, s, ok);
  out << '\n';
}

}  // namespace

void write_metrics_json(std::ostream& out, const std::vector<RunMetrics>& runs) {
  json doc;
  doc["runs"] = json::array();
  for (const RunMetrics& r : runs) {
    json run;
    run["seed"] = r.seed;
    run["rmse_tsum"] = number_or_null(r.rmse_tsum);
    run["rmse_v"] = number_or_null(r.rmse_v);
    run["eval_count"] = r.eval_count;
    run["ess_trace"] = r.ess_trace;
    run["failed"] = r.failed;
    doc["runs"].push_back(std::move(run));
  }
  json summary;
  try {
    const Summary s = aggregate_metrics(runs);
    summary["rmse_tsum_mean"] = s.rmse_tsum_mean;
    summary["rmse_tsum_std"] = s.rmse_tsum_std;
    summary["rmse_v_mean"] = s.rmse_v_mean;
    summary["rmse_v_std"] = s.rmse_v_std;
    summary["failed_runs"] = s.failed_runs;
  } catch (const NoSuccessfulRuns&) {
    summary["rmse_tsum_mean"] = nullptr;
    summary["rmse_tsum_std"] = nullptr;
    summary["rmse_v_mean"] = nullptr;
    summary["rmse_v_std"] = nullptr;
    summary["failed_runs"] = runs.size();
  }
  doc["summary"] = std::move(summary);
  out << doc.dump(2) << '\n';
}

void write_metrics_json(const std::string& path, const std::vector<RunMetrics>& runs) {
  std::ofstream out = open_output(path);
  write_metrics_json(out, runs);
}

std::vector<RunMetrics> read_metrics_json(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed metrics file: ") + e.what());
  }
  std::vector<RunMetrics> runs;
  for (const json& j : doc.at("runs")) {
    RunMetrics r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.rmse_tsum = json_real(j.at("rmse_tsum"));
    r.rmse_v = json_real(j.at("rmse_v"));
    r.eval_count = j.at("eval_count").get<std::size_t>();
    r.ess_trace = j.at("ess_trace").get<std::vector<double>>();
    r.failed = j.at("failed").get<bool>();
    runs.push_back(std::move(r));
  }
  return runs;
}

void write_sweep_csv(std::ostream& out, SweepParameter parameter, const std::vector<SweepRow>& rows) {
  out << "parameter,value," << kSummaryHeader << '\n';
  for (const SweepRow& row : rows) {
    out << to_string(parameter) << ',' << fmt(row.value) << ',';
    write_summary_columns(out, row.summary, row.ok);
    out << '\n';
  }
}

void write_comparison_csv(std::ostream& out, const Comparison& comparison) {
  out << "filter,particles,partition,xnes_iterations,xnes_population,resampler," << kSummaryHeader << '\n';
  write_entry(out, comparison.bootstrap);
  write_entry(out, comparison.xnpf);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot open output file '" + path + "'");
  }
  return out;
}

}  // namespace xnpf::bench
