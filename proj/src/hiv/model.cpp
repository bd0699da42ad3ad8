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

#include <xnpf/hiv/model.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace xnpf::hiv {

namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178;

// Tolerance, in units of the period, for deciding that t sits on a square-wave switch.
constexpr double kPhaseTolerance = 1e-9;

// Upper bound on the substeps a single integration step may be split into.
constexpr int kMaxSubsteps = 4096;

double gaussian_log_pdf(double residual, double sd) {
  if (sd == 0.0) {
    return residual == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  const double r = residual / sd;
  return -kHalfLogTwoPi - std::log(sd) - 0.5 * r * r;
}

CellState clamp_cells(CellState x) { return x.cwiseMax(0.0); }

double phase_of(double t, double period) {
  double phase = std::fmod(t, period) / period;
  if (phase < 0.0) {
    phase += 1.0;
  }
  return phase;
}

}  // namespace

void Params::validate() const {
  if (!(s > 0 && d > 0 && beta > 0 && zeta > 0 && k > 0 && c > 0)) {
    throw ConfigError("HIV parameters must all be strictly positive");
  }
}

std::string_view to_string(Waveform w) { return w == Waveform::kSquare ? "square" : "sinusoid"; }

Waveform parse_waveform(std::string_view name) {
  if (name == "square") {
    return Waveform::kSquare;
  }
  if (name == "sinusoid") {
    return Waveform::kSinusoid;
  }
  throw ConfigError("unknown beta waveform '" + std::string(name) + "'");
}

void BetaSchedule::validate() const {
  if (!(period > 0)) {
    throw ConfigError("beta schedule period must be positive");
  }
  if (!(duty > 0 && duty < 1)) {
    throw ConfigError("beta schedule duty must lie in (0, 1)");
  }
  if (!(high > low && low > 0)) {
    throw ConfigError("beta schedule requires high > low > 0");
  }
}

void MeasurementNoise::validate() const {
  if (!(var_tsum > 0 && var_v > 0)) {
    throw ConfigError("measurement noise variances must be positive");
  }
}

double beta_schedule(double t, const BetaSchedule& schedule) {
  if (schedule.waveform == Waveform::kSinusoid) {
    return schedule.low +
           (schedule.high - schedule.low) * 0.5 * (1.0 + std::sin(2.0 * std::numbers::pi * t / schedule.period));
  }
  double phase = phase_of(t, schedule.period);
  if (phase > 1.0 - kPhaseTolerance) {
    phase = 0.0;
  }
  return phase < schedule.duty - kPhaseTolerance ? schedule.high : schedule.low;
}

double beta_schedule_before(double t, const BetaSchedule& schedule) {
  if (schedule.waveform == Waveform::kSinusoid) {
    return beta_schedule(t, schedule);
  }
  const double phase = phase_of(t, schedule.period);
  if (phase < kPhaseTolerance || phase > 1.0 - kPhaseTolerance) {
    return schedule.low;
  }
  if (std::abs(phase - schedule.duty) < kPhaseTolerance) {
    return schedule.high;
  }
  return beta_schedule(t, schedule);
}

CellState derivatives(const CellState& x, double beta, const Params& p) {
  const double infection = beta * x(kT) * x(kVirus);
  return {p.s - p.d * x(kT) - infection, infection - p.zeta * x(kTStar), p.k * x(kTStar) - p.c * x(kVirus)};
}

BetaInput BetaInput::constant(double beta) {
  auto fn = [beta](double) { return beta; };
  return {fn, fn};
}

BetaInput BetaInput::scheduled(const BetaSchedule& schedule) {
  return {[schedule](double t) { return beta_schedule(t, schedule); },
          [schedule](double t) { return beta_schedule_before(t, schedule); }};
}

CellState rk4_step(const CellState& x, double t, double dt, const BetaInput& beta, const Params& params) {
  const double half = 0.5 * dt;
  const double beta_start = beta.at(t);
  const double beta_mid = beta.at(t + half);
  const double beta_end = beta.before(t + dt);
  const CellState k1 = derivatives(x, beta_start, params);
  const CellState k2 = derivatives(x + half * k1, beta_mid, params);
  const CellState k3 = derivatives(x + half * k2, beta_mid, params);
  const CellState k4 = derivatives(x + dt * k3, beta_end, params);
  return clamp_cells(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

CellState rk4_step(const CellState& x, double t, double dt, const BetaSchedule& schedule, const Params& params) {
  return rk4_step(x, t, dt, BetaInput::scheduled(schedule), params);
}

double stiffness(const CellState& x, double beta, const Params& p) {
  const double healthy = p.d + beta * std::abs(x(kVirus));
  const double mean_rate = 0.5 * (p.zeta + p.c);
  const double spread = 0.5 * (p.zeta - p.c);
  const double infected = mean_rate + std::sqrt(spread * spread + p.k * beta * std::abs(x(kT)));
  return std::max(healthy, infected);
}

CellState integrate(const CellState& x, double t0, double duration, double dt, const BetaInput& beta,
                    const Params& params) {
  if (!(dt > 0) || !(duration > 0)) {
    throw Error("integrate requires positive dt and duration");
  }
  const auto steps = std::max<long long>(1, std::llround(duration / dt));
  const double h = duration / static_cast<double>(steps);
  CellState state = x;
  for (long long i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    const double rate = std::max(stiffness(state, beta.at(t), params), stiffness(state, beta.before(t + h), params));
    const double needed = std::ceil(rate * h);
    const int substeps = std::isfinite(needed) ? std::clamp(static_cast<int>(needed), 1, kMaxSubsteps) : kMaxSubsteps;
    if (substeps == 1) {
      state = rk4_step(state, t, h, beta, params);
      continue;
    }
    const double sub = h / substeps;
    for (int j = 0; j < substeps; ++j) {
      state = rk4_step(state, t + j * sub, sub, beta, params);
    }
    if (!state.allFinite()) {
      break;
    }
  }
  return state;
}

Observation measure(const CellState& x) { return {x(kT) + x(kTStar), x(kVirus)}; }

Observation observe(const CellState& x, const MeasurementNoise& noise, Stream& rng) {
  const double e1 = std::sqrt(noise.var_tsum) * rng.normal();
  const double e2 = std::sqrt(noise.var_v) * rng.normal();
  return measure(x) + Observation(e1, e2);
}

double observation_log_likelihood(const Observation& z, const CellState& x, const MeasurementNoise& noise) {
  const Observation residual = z - measure(x);
  return gaussian_log_pdf(residual(0), std::sqrt(noise.var_tsum)) + gaussian_log_pdf(residual(1), std::sqrt(noise.var_v));
}

Trajectory simulate_truth(const Params& params, const BetaSchedule& schedule, const MeasurementNoise& noise, int days,
                          const CellState& init, Stream& rng, double dt) {
  if (days < 1) {
    throw Error("simulate_truth requires at least one day");
  }
  const BetaInput beta = BetaInput::scheduled(schedule);
  Trajectory out;
  out.times.reserve(static_cast<std::size_t>(days));
  out.states.reserve(static_cast<std::size_t>(days));
  out.beta.reserve(static_cast<std::size_t>(days));
  out.observations.reserve(static_cast<std::size_t>(days));
  CellState state = clamp_cells(init);
  for (int day = 0; day < days; ++day) {
    state = integrate(state, static_cast<double>(day), 1.0, dt, beta, params);
    const double t = static_cast<double>(day + 1);
    out.times.push_back(t);
    out.states.push_back(state);
    out.beta.push_back(beta_schedule(t, schedule));
    out.observations.push_back(observe(state, noise, rng));
  }
  return out;
}

FilterModel::FilterModel(const Params& params, const MeasurementNoise& noise, const TransitionNoise& transition,
                         double dt, double interval)
    : params_(params), noise_(noise), transition_(transition), dt_(dt), interval_(interval), sd_(4) {
  if (!(transition.cells >= 0 && transition.log_beta >= 0)) {
    throw ConfigError("transition noise scales must be non-negative");
  }
  if (!(dt > 0 && interval > 0)) {
    throw ConfigError("integration step and observation interval must be positive");
  }
  sd_ << transition.cells, transition.cells, transition.cells, transition.log_beta;
}

Vector<double> FilterModel::predict(const Vector<double>& x, std::size_t /*t*/) const {
  const CellState cells = clamp_cells(x.head<3>());
  const double log_beta = x(kLogBeta);
  Vector<double> out(4);
  out.head<3>() = integrate(cells, 0.0, interval_, dt_, BetaInput::constant(std::exp(log_beta)), params_);
  out(kLogBeta) = log_beta;
  return out;
}

Vector<double> FilterModel::perturb(const Vector<double>& image, Stream& rng) const {
  Vector<double> out(4);
  for (Index j = 0; j < 4; ++j) {
    out(j) = image(j) + sd_(j) * rng.normal();
  }
  out.head<3>() = out.head<3>().cwiseMax(0.0);
  return out;
}

double FilterModel::transition_log_density_about(const Vector<double>& x, const Vector<double>& image) const {
  double total = 0.0;
  for (Index j = 0; j < 4; ++j) {
    total += gaussian_log_pdf(x(j) - image(j), sd_(j));
  }
  return total;
}

double FilterModel::observation_log_likelihood(const Vector<double>& z, const Vector<double>& x) const {
  return hiv::observation_log_likelihood(Observation(z(0), z(1)), CellState(x.head<3>()), noise_);
}

Vector<double> FilterModel::transition_variance() const { return sd_.array().square(); }

Cloud initial_cloud(const CellState& init, double beta0, const InitialSpread& spread, Index n, Stream& rng) {
  if (n < 1) {
    throw ConfigError("the particle count must be at least one");
  }
  Cloud cloud = Cloud::uniform(4, n);
  const double log_beta0 = std::log(beta0);
  for (Index i = 0; i < n; ++i) {
    cloud.states(kT, i) = std::max(0.0, init(kT) + spread.T * rng.normal());
    cloud.states(kTStar, i) = std::max(0.0, init(kTStar) + spread.T_star * rng.normal());
    cloud.states(kVirus, i) = std::max(0.0, init(kVirus) + spread.v * rng.normal());
    cloud.states(kLogBeta, i) = log_beta0 + spread.log_beta * rng.normal();
  }
  return cloud;
}

}  // namespace xnpf::hiv
