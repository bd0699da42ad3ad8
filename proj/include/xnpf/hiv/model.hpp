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

#ifndef XNPF_HIV_MODEL_HPP
#define XNPF_HIV_MODEL_HPP

#include <xnpf/core.hpp>

#include <Eigen/Dense>

#include <functional>
#include <string_view>
#include <vector>

/**
 * \file
 * \brief Basic three-state HIV infection model with a time-varying infection rate.
 *
 *   dT/dt    = s - d T - beta(t) T v
 *   d(T*)/dt = beta(t) T v - zeta T*
 *   dv/dt    = k T* - c v
 *
 * observed through z = (T + T* + e1, v + e2). Units are cells/uL (T, T*), virions/uL (v) and days.
 */

namespace xnpf::hiv {

/// Healthy cells, infected cells, free virus.
using CellState = Eigen::Vector3d;
using Observation = Eigen::Vector2d;

/// Component order of the filter state (T, T*, v, log beta).
enum StateIndex : Index { kT = 0, kTStar = 1, kVirus = 2, kLogBeta = 3 };

struct Params {
  double s = 368.94;
  double d = 0.46;
  double beta = 7.26e-06;
  double zeta = 2.16;
  double k = 1317.4;
  double c = 3.6;

  void validate() const;
  /// Disease-free equilibrium (s/d, 0, 0).
  [[nodiscard]] CellState disease_free() const { return {s / d, 0.0, 0.0}; }

  friend bool operator==(const Params&, const Params&) = default;
};

enum class Waveform { kSquare, kSinusoid };

std::string_view to_string(Waveform w);
Waveform parse_waveform(std::string_view name);

/// Periodic infection-rate input.
struct BetaSchedule {
  double period = 25.0;
  double high = 3.63e-04;
  double low = 7.26e-06;
  /// Fraction of each period spent at `high` (square wave only).
  double duty = 0.5;
  Waveform waveform = Waveform::kSquare;

  void validate() const;
  friend bool operator==(const BetaSchedule&, const BetaSchedule&) = default;
};

/// beta(t). The square wave is `high` on [n P, n P + duty P) and `low` elsewhere.
double beta_schedule(double t, const BetaSchedule& schedule);

/// Left limit of beta at t; differs from beta_schedule only at square-wave switch times.
double beta_schedule_before(double t, const BetaSchedule& schedule);

struct MeasurementNoise {
  double var_tsum = 0.05;
  double var_v = 1.0;

  void validate() const;
  friend bool operator==(const MeasurementNoise&, const MeasurementNoise&) = default;
};

CellState derivatives(const CellState& x, double beta, const Params& params);

/// Infection rate as a function of time. `before` is the left limit, used at the end node of a step.
struct BetaInput {
  std::function<double(double)> at;
  std::function<double(double)> before;

  static BetaInput constant(double beta);
  static BetaInput scheduled(const BetaSchedule& schedule);
};

/// One classical RK4 step over [t, t + dt]; the result is clamped to be non-negative.
CellState rk4_step(const CellState& x, double t, double dt, const BetaInput& beta, const Params& params);
CellState rk4_step(const CellState& x, double t, double dt, const BetaSchedule& schedule, const Params& params);

/// Rough magnitude of the fastest local rate (1/day), used to subdivide stiff steps.
double stiffness(const CellState& x, double beta, const Params& params);

/// Integrates over [t0, t0 + duration] with steps of about `dt`, subdividing any step whose
/// stiffness times the step length exceeds one.
CellState integrate(const CellState& x, double t0, double duration, double dt, const BetaInput& beta,
                    const Params& params);

/// Noisy observation z = (T + T* + e1, v + e2).
Observation observe(const CellState& x, const MeasurementNoise& noise, Stream& rng);

/// Noise-free observation map.
Observation measure(const CellState& x);

/// Sum of the two Gaussian log-densities of the observation residuals.
double observation_log_likelihood(const Observation& z, const CellState& x, const MeasurementNoise& noise);

struct Trajectory {
  /// Time in days at the end of each simulated day, 1..days.
  std::vector<double> times;
  std::vector<CellState> states;
  std::vector<double> beta;
  std::vector<Observation> observations;

  [[nodiscard]] std::size_t size() const { return times.size(); }
};

/// Deterministic truth integrated with inner step `dt`, observed once per day with fresh noise.
Trajectory simulate_truth(const Params& params, const BetaSchedule& schedule, const MeasurementNoise& noise, int days,
                          const CellState& init, Stream& rng, double dt = 0.01);

/// Scales of the filter-side random-walk transition noise.
struct TransitionNoise {
  double cells = 10.0;
  double log_beta = 0.05;

  friend bool operator==(const TransitionNoise&, const TransitionNoise&) = default;
};

/// Filter-side model over x = (T, T*, v, log beta): one observation interval of RK4 with
/// beta = exp(log beta), then additive Gaussian noise and a non-negativity clamp on the cells.
/// The transition density ignores the clamp.
class FilterModel {
 public:
  using Scalar = double;

  FilterModel(const Params& params, const MeasurementNoise& noise, const TransitionNoise& transition,
              double dt = 0.01, double interval = 1.0);

  [[nodiscard]] Index state_dim() const { return 4; }
  [[nodiscard]] Index obs_dim() const { return 2; }

  [[nodiscard]] Vector<double> predict(const Vector<double>& x, std::size_t t) const;
  Vector<double> perturb(const Vector<double>& image, Stream& rng) const;
  [[nodiscard]] double transition_log_density_about(const Vector<double>& x, const Vector<double>& image) const;
  [[nodiscard]] double observation_log_likelihood(const Vector<double>& z, const Vector<double>& x) const;
  [[nodiscard]] Vector<double> transition_variance() const;

  [[nodiscard]] const Params& params() const { return params_; }
  [[nodiscard]] const MeasurementNoise& noise() const { return noise_; }
  [[nodiscard]] const TransitionNoise& transition() const { return transition_; }

 private:
  Params params_;
  MeasurementNoise noise_;
  TransitionNoise transition_;
  double dt_;
  double interval_;
  Vector<double> sd_;
};

/// Standard deviations of the initial particle cloud around the initial truth.
struct InitialSpread {
  double T = 50.0;
  double T_star = 10.0;
  double v = 10.0;
  double log_beta = 0.5;

  friend bool operator==(const InitialSpread&, const InitialSpread&) = default;
};

/// N particles drawn around (init, log beta0), cells clamped at zero, uniform weights.
Cloud initial_cloud(const CellState& init, double beta0, const InitialSpread& spread, Index n, Stream& rng);

}  // namespace xnpf::hiv

#endif
