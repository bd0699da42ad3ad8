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

#include <xnpf/bench/config.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace xnpf::bench {

namespace {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid value '" + std::string(text) + "' for key '" + std::string(key) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") {
    return true;
  }
  if (text == "false" || text == "0") {
    return false;
  }
  throw ConfigError("invalid boolean '" + std::string(text) + "' for key '" + std::string(key) + "'");
}

struct Field {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view)> set;
};

template <class Access>
Field real_field(std::string key, Access access) {
  return {key, [access](const ExperimentConfig& c) { return format_double(access(c)); },
          [access, key](ExperimentConfig& c, std::string_view v) { access(c) = parse_number<double>(key, v); }};
}

template <class Int, class Access>
Field int_field(std::string key, Access access) {
  return {key, [access](const ExperimentConfig& c) { return std::to_string(access(c)); },
          [access, key](ExperimentConfig& c, std::string_view v) { access(c) = parse_number<Int>(key, v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"filter", [](const ExperimentConfig& c) { return std::string(to_string(c.filter)); },
                 [](ExperimentConfig& c, std::string_view v) { c.filter = parse_filter_kind(v); }});
    f.push_back(int_field<int>("days", [](auto& c) -> auto& { return c.days; }));
    f.push_back(int_field<int>("runs", [](auto& c) -> auto& { return c.runs; }));
    f.push_back(int_field<std::uint64_t>("master_seed", [](auto& c) -> auto& { return c.master_seed; }));
    f.push_back({"fixed_truth", [](const ExperimentConfig& c) { return std::string(c.fixed_truth ? "true" : "false"); },
                 [](ExperimentConfig& c, std::string_view v) { c.fixed_truth = parse_bool("fixed_truth", v); }});
    f.push_back(int_field<int>("threads", [](auto& c) -> auto& { return c.threads; }));

    f.push_back(int_field<Index>("xnpf.particles", [](auto& c) -> auto& { return c.xnpf.particles; }));
    f.push_back(real_field("xnpf.partition", [](auto& c) -> auto& { return c.xnpf.partition; }));
    f.push_back(real_field("xnpf.transition_step", [](auto& c) -> auto& { return c.xnpf.transition_step; }));
    f.push_back({"xnpf.resampler",
                 [](const ExperimentConfig& c) {
                   return c.resampler ? std::string(to_string(*c.resampler)) : std::string("auto");
                 },
                 [](ExperimentConfig& c, std::string_view v) {
                   if (v == "auto") {
                     c.resampler.reset();
                   } else {
                     c.resampler = parse_resample_scheme(v);
                   }
                 }});
    f.push_back({"xnpf.mixture", [](const ExperimentConfig& c) { return std::string(to_string(c.xnpf.mixture)); },
                 [](ExperimentConfig& c, std::string_view v) { c.xnpf.mixture = parse_mixture_coefficients(v); }});
    f.push_back(
        real_field("xnpf.resample_threshold", [](auto& c) -> auto& { return c.xnpf.resample_threshold; }));
    f.push_back(int_field<Index>("xnpf.xnes.population", [](auto& c) -> auto& { return c.xnpf.xnes.population; }));
    f.push_back(int_field<int>("xnpf.xnes.iterations", [](auto& c) -> auto& { return c.xnpf.xnes.iterations; }));
    f.push_back(real_field("xnpf.xnes.eta_mean", [](auto& c) -> auto& { return c.xnpf.xnes.eta_mean; }));
    f.push_back(real_field("xnpf.xnes.eta_sigma", [](auto& c) -> auto& { return c.xnpf.xnes.eta_sigma; }));
    f.push_back(real_field("xnpf.xnes.eta_shape", [](auto& c) -> auto& { return c.xnpf.xnes.eta_shape; }));

    f.push_back(real_field("model.params.s", [](auto& c) -> auto& { return c.model.params.s; }));
    f.push_back(real_field("model.params.d", [](auto& c) -> auto& { return c.model.params.d; }));
    f.push_back(real_field("model.params.beta", [](auto& c) -> auto& { return c.model.params.beta; }));
    f.push_back(real_field("model.params.zeta", [](auto& c) -> auto& { return c.model.params.zeta; }));
    f.push_back(real_field("model.params.k", [](auto& c) -> auto& { return c.model.params.k; }));
    f.push_back(real_field("model.params.c", [](auto& c) -> auto& { return c.model.params.c; }));
    f.push_back(real_field("model.schedule.period", [](auto& c) -> auto& { return c.model.schedule.period; }));
    f.push_back(real_field("model.schedule.high", [](auto& c) -> auto& { return c.model.schedule.high; }));
    f.push_back(real_field("model.schedule.low", [](auto& c) -> auto& { return c.model.schedule.low; }));
    f.push_back(real_field("model.schedule.duty", [](auto& c) -> auto& { return c.model.schedule.duty; }));
    f.push_back({"model.schedule.waveform",
                 [](const ExperimentConfig& c) { return std::string(hiv::to_string(c.model.schedule.waveform)); },
                 [](ExperimentConfig& c, std::string_view v) { c.model.schedule.waveform = hiv::parse_waveform(v); }});
    f.push_back(real_field("model.noise.var_tsum", [](auto& c) -> auto& { return c.model.noise.var_tsum; }));
    f.push_back(real_field("model.noise.var_v", [](auto& c) -> auto& { return c.model.noise.var_v; }));
    f.push_back(real_field("model.init.T", [](auto& c) -> auto& { return c.model.init.T; }));
    f.push_back(real_field("model.init.T_star", [](auto& c) -> auto& { return c.model.init.T_star; }));
    f.push_back(real_field("model.init.v", [](auto& c) -> auto& { return c.model.init.v; }));
    f.push_back(real_field("model.init.beta", [](auto& c) -> auto& { return c.model.init.beta; }));
    f.push_back(real_field("model.spread.T", [](auto& c) -> auto& { return c.model.spread.T; }));
    f.push_back(real_field("model.spread.T_star", [](auto& c) -> auto& { return c.model.spread.T_star; }));
    f.push_back(real_field("model.spread.v", [](auto& c) -> auto& { return c.model.spread.v; }));
    f.push_back(real_field("model.spread.log_beta", [](auto& c) -> auto& { return c.model.spread.log_beta; }));
    f.push_back(real_field("model.log_beta_step", [](auto& c) -> auto& { return c.model.log_beta_step; }));
    f.push_back(
        real_field("model.integration_step", [](auto& c) -> auto& { return c.model.integration_step; }));

    f.push_back({"output.metrics", [](const ExperimentConfig& c) { return c.output.metrics; },
                 [](ExperimentConfig& c, std::string_view v) { c.output.metrics = std::string(v); }});
    f.push_back({"output.table", [](const ExperimentConfig& c) { return c.output.table; },
                 [](ExperimentConfig& c, std::string_view v) { c.output.table = std::string(v); }});
    f.push_back({"output.truth", [](const ExperimentConfig& c) { return c.output.truth; },
                 [](ExperimentConfig& c, std::string_view v) { c.output.truth = std::string(v); }});
    return f;
  }();
  return table;
}

const Field* find_field(std::string_view key) {
  for (const Field& f : fields()) {
    if (f.key == key) {
      return &f;
    }
  }
  return nullptr;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (days < 1) {
    throw ConfigError("days must be at least 1");
  }
  if (runs < 1) {
    throw ConfigError("runs must be at least 1");
  }
  if (threads < 1) {
    throw ConfigError("threads must be at least 1");
  }
  if (xnpf.particles < 1) {
    throw ConfigError("xnpf.particles must be at least 1");
  }
  if (!(xnpf.partition >= 0.0 && xnpf.partition <= 1.0)) {
    throw ConfigError("xnpf.partition must lie in [0, 1]");
  }
  if (!(xnpf.transition_step >= 0.0)) {
    throw ConfigError("xnpf.transition_step must be non-negative");
  }
  if (!(xnpf.resample_threshold >= 0.0)) {
    throw ConfigError("xnpf.resample_threshold must be non-negative");
  }
  if (xnpf.xnes.population < 0 || xnpf.xnes.population == 1) {
    throw ConfigError("xnpf.xnes.population must be 0 (automatic) or at least 2");
  }
  if (xnpf.xnes.iterations < 0) {
    throw ConfigError("xnpf.xnes.iterations must be non-negative");
  }
  if (!(xnpf.xnes.eta_mean >= 0 && xnpf.xnes.eta_sigma >= 0 && xnpf.xnes.eta_shape >= 0)) {
    throw ConfigError("xnpf.xnes learning rates must be non-negative");
  }
  model.params.validate();
  model.schedule.validate();
  model.noise.validate();
  if (!(model.init.T >= 0 && model.init.T_star >= 0 && model.init.v >= 0)) {
    throw ConfigError("model.init cell states must be non-negative");
  }
  if (!(model.init.beta > 0)) {
    throw ConfigError("model.init.beta must be positive");
  }
  if (!(model.spread.T >= 0 && model.spread.T_star >= 0 && model.spread.v >= 0 && model.spread.log_beta >= 0)) {
    throw ConfigError("model.spread scales must be non-negative");
  }
  if (!(model.log_beta_step >= 0)) {
    throw ConfigError("model.log_beta_step must be non-negative");
  }
  if (!(model.integration_step > 0 && model.integration_step <= 1)) {
    throw ConfigError("model.integration_step must lie in (0, 1]");
  }
}

XnpfConfig ExperimentConfig::filter_config() const {
  XnpfConfig out = xnpf;
  if (resampler) {
    out.resampler = *resampler;
  } else {
    out.resampler = filter == FilterKind::kBootstrap ? ResampleScheme::kMultinomial : ResampleScheme::kSus;
  }
  return out;
}

hiv::FilterModel ExperimentConfig::filter_model() const {
  return hiv::FilterModel(model.params, model.noise, hiv::TransitionNoise{xnpf.transition_step, model.log_beta_step},
                          model.integration_step);
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = trim(view);
    if (view.empty()) {
      continue;
    }
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = trim(view.substr(0, eq));
    const std::string_view value = trim(view.substr(eq + 1));
    const Field* field = find_field(key);
    if (field == nullptr) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
    if (!seen.emplace(key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
    }
    field->set(cfg, value);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  for (const Field& f : fields()) {
    out << f.key << " = " << f.get(cfg) << '\n';
  }
}

}  // namespace xnpf::bench
