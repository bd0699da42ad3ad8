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

#ifndef XNPF_HIV_TRAJECTORY_IO_HPP
#define XNPF_HIV_TRAJECTORY_IO_HPP

#include <xnpf/hiv/model.hpp>

#include <iosfwd>
#include <string>

namespace xnpf::hiv {

/// Header of the truth/observation CSV.
inline constexpr const char* kTrajectoryHeader = "t,T,Tstar,v,beta,z1,z2";

/// One row per day, every value printed with 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
void write_trajectory_csv(const std::string& path, const Trajectory& trajectory);

/// Parses the format written by write_trajectory_csv. Throws Error on malformed input.
Trajectory read_trajectory_csv(std::istream& in);

}  // namespace xnpf::hiv

#endif
