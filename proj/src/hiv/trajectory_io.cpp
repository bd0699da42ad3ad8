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

#include <xnpf/hiv/trajectory_io.hpp>

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace xnpf::hiv {

namespace {

std::string format17(double value) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", value);
  return buf.data();
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << kTrajectoryHeader << '\n';
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    const CellState& x = trajectory.states[i];
    const Observation& z = trajectory.observations[i];
    out << format17(trajectory.times[i]) << ',' << format17(x(kT)) << ',' << format17(x(kTStar)) << ','
        << format17(x(kVirus)) << ',' << format17(trajectory.beta[i]) << ',' << format17(z(0)) << ','
        << format17(z(1)) << '\n';
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& trajectory) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open '" + path + "' for writing");
  }
  write_trajectory_csv(out, trajectory);
  if (!out) {
    throw Error("failed writing '" + path + "'");
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryHeader) {
    throw Error("trajectory CSV: missing or unexpected header");
  }
  Trajectory out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) {
      continue;
    }
    std::array<double, 7> values{};
    std::size_t field = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (field < values.size()) {
      const auto [next, ec] = std::from_chars(p, end, values[field]);
      if (ec != std::errc()) {
        throw Error("trajectory CSV: bad number on row " + std::to_string(row));
      }
      p = next;
      ++field;
      if (field < values.size()) {
        if (p == end || *p != ',') {
          throw Error("trajectory CSV: expected 7 fields on row " + std::to_string(row));
        }
        ++p;
      }
    }
    if (p != end) {
      throw Error("trajectory CSV: trailing data on row " + std::to_string(row));
    }
    out.times.push_back(values[0]);
    out.states.emplace_back(values[1], values[2], values[3]);
    out.beta.push_back(values[4]);
    out.observations.emplace_back(values[5], values[6]);
  }
  return out;
}

}  // namespace xnpf::hiv
