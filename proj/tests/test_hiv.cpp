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

#include <gtest/gtest.h>

#include <xnpf/hiv/model.hpp>
#include <xnpf/hiv/trajectory_io.hpp>

#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace {

using namespace xnpf::hiv;
using Eigen::VectorXd;

CellState rk4_fixed(CellState x, double t0, double duration, double dt, const BetaInput& beta, const Params& p) {
  const auto steps = static_cast<int>(std::lround(duration / dt));
  for (int i = 0; i < steps; ++i) {
    x = rk4_step(x, t0 + i * dt, dt, beta, p);
  }
  return x;
}

TEST(HivParams, DefaultsAndDiseaseFreePoint) {
  const Params p;
  EXPECT_EQ(p.s, 368.94);
  EXPECT_EQ(p.d, 0.46);
  EXPECT_EQ(p.beta, 7.26e-06);
  EXPECT_EQ(p.zeta, 2.16);
  EXPECT_EQ(p.k, 1317.4);
  EXPECT_EQ(p.c, 3.6);
  EXPECT_NEAR(p.disease_free()(kT), 802.0435, 1e-3);
}

TEST(HivParams, RejectsNonPositive) {
  Params p;
  p.zeta = 0.0;
  EXPECT_THROW(p.validate(), xnpf::ConfigError);
}

TEST(Derivatives, VanishAtDiseaseFreePoint) {
  const Params p;
  EXPECT_LT(derivatives(p.disease_free(), 3.63e-4, p).norm(), 1e-9);
}

TEST(Derivatives, MatchFormula) {
  const Params p;
  const CellState x{700.0, 12.0, 400.0};
  const double b = 2e-5;
  const CellState r = derivatives(x, b, p);
  EXPECT_DOUBLE_EQ(r(0), 368.94 - 0.46 * 700.0 - b * 700.0 * 400.0);
  EXPECT_DOUBLE_EQ(r(1), b * 700.0 * 400.0 - 2.16 * 12.0);
  EXPECT_DOUBLE_EQ(r(2), 1317.4 * 12.0 - 3.6 * 400.0);
}

TEST(Derivatives, InfectedCellsDecayWithoutVirus) {
  const Params p;
  const CellState r = derivatives(CellState{500.0, 30.0, 0.0}, 3.63e-4, p);
  EXPECT_DOUBLE_EQ(r(kTStar), -p.zeta * 30.0);
}

TEST(Rk4Step, KeepsEquilibrium) {
  const Params p;
  // Endemic equilibrium of the constant-beta system.
  const double b = 3.63e-4;
  const double t_eq = p.zeta * p.c / (b * p.k);
  const double ts_eq = (p.s - p.d * t_eq) / p.zeta;
  const CellState eq{t_eq, ts_eq, p.k * ts_eq / p.c};
  EXPECT_LT((rk4_step(eq, 0.0, 0.01, BetaInput::constant(b), p) - eq).cwiseQuotient(eq).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((rk4_step(p.disease_free(), 0.0, 0.1, BetaInput::constant(b), p) - p.disease_free()).norm(), 1e-9);
}

TEST(Rk4Step, FourthOrderConvergence) {
  const Params p;
  const BetaInput beta = BetaInput::constant(2e-5);
  const CellState x0{700.0, 20.0, 500.0};
  const double h0 = 0.05;
  const CellState reference = rk4_fixed(x0, 0.0, 2.0, h0 / 16.0, beta, p);
  double previous = 0.0;
  for (int level = 0; level < 3; ++level) {
    const double h = h0 / std::pow(2.0, level);
    const double err = (rk4_fixed(x0, 0.0, 2.0, h, beta, p) - reference).norm();
    if (level > 0) {
      const double ratio = previous / err;
      EXPECT_GE(ratio, 12.0) << "h = " << h;
      EXPECT_LE(ratio, 20.0) << "h = " << h;
    }
    previous = err;
  }
}

TEST(Rk4Step, ClampsNegativeComponents) {
  const Params p;
  const CellState out = rk4_step(CellState{1.0, 0.0, 1e-9}, 0.0, 1.0, BetaInput::constant(1.0), p);
  EXPECT_TRUE((out.array() >= 0.0).all());
}

TEST(Integrate, AgreesWithTinyStepEuler) {
  const Params p;
  const BetaSchedule schedule;
  for (const CellState& x0 : {CellState{700.0, 10.0, 800.0}, CellState{200.0, 40.0, 20000.0},
                              CellState{168.0, 120.0, 60000.0}}) {
    for (double t0 : {3.0, 15.0}) {
      const CellState rk = integrate(x0, t0, 1.0, 0.01, BetaInput::scheduled(schedule), p);
      const CellState eu = xnpf::testing::euler_integrate(x0, t0, 1.0, 1e-5, schedule, p);
      EXPECT_LT((rk - eu).cwiseQuotient(eu).cwiseAbs().maxCoeff(), 1e-4) << "t0 = " << t0;
    }
  }
}

TEST(Integrate, SubdividesStiffSteps) {
  const Params p;
  const BetaInput beta = BetaInput::constant(3.63e-4);
  const CellState x0{800.0, 5.0, 60000.0};
  const CellState coarse = integrate(x0, 0.0, 1.0, 0.5, beta, p);
  const CellState fine = rk4_fixed(x0, 0.0, 1.0, 1e-4, beta, p);
  EXPECT_LT((coarse - fine).cwiseQuotient(fine).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(BetaSchedule, SquareWaveValues) {
  const BetaSchedule s;
  EXPECT_EQ(beta_schedule(0.0, s), 3.63e-04);
  EXPECT_EQ(beta_schedule(0.75 * s.period, s), 7.26e-06);
  EXPECT_EQ(beta_schedule(12.5, s), s.low);
  EXPECT_EQ(beta_schedule(12.4, s), s.high);
  EXPECT_EQ(beta_schedule_before(12.5, s), s.high);
  EXPECT_EQ(beta_schedule_before(25.0, s), s.low);
}

TEST(BetaSchedule, Periodic) {
  xnpf::Stream rng(1);
  for (const Waveform w : {Waveform::kSquare, Waveform::kSinusoid}) {
    BetaSchedule s;
    s.waveform = w;
    for (int rep = 0; rep < 1000; ++rep) {
      const double t = 190.0 * rng.uniform();
      EXPECT_NEAR(beta_schedule(t, s), beta_schedule(t + s.period, s), 1e-12 * s.high);
    }
  }
}

TEST(BetaSchedule, SinusoidFormula) {
  BetaSchedule s;
  s.waveform = Waveform::kSinusoid;
  const double t = 3.7;
  EXPECT_NEAR(beta_schedule(t, s),
              s.low + (s.high - s.low) * (1.0 + std::sin(2.0 * std::numbers::pi * t / s.period)) / 2.0, 1e-18);
}

TEST(BetaSchedule, Validation) {
  BetaSchedule s;
  s.duty = 1.0;
  EXPECT_THROW(s.validate(), xnpf::ConfigError);
  s = BetaSchedule{};
  s.low = s.high;
  EXPECT_THROW(s.validate(), xnpf::ConfigError);
  EXPECT_EQ(parse_waveform(to_string(Waveform::kSinusoid)), Waveform::kSinusoid);
  EXPECT_THROW(parse_waveform("triangle"), xnpf::ConfigError);
}

TEST(Observe, NoiseFreeMap) {
  EXPECT_EQ(measure(CellState{800.0, 2.0, 50.0}), (Observation{802.0, 50.0}));
}

TEST(Observe, ChannelVariances) {
  const CellState x{800.0, 2.0, 50.0};
  const MeasurementNoise noise;
  xnpf::Stream rng(2);
  double s1 = 0.0, s2 = 0.0, q1 = 0.0, q2 = 0.0, cross = 0.0;
  const int reps = 10000;
  for (int rep = 0; rep < reps; ++rep) {
    const Observation e = observe(x, noise, rng) - measure(x);
    s1 += e(0);
    s2 += e(1);
    q1 += e(0) * e(0);
    q2 += e(1) * e(1);
    cross += e(0) * e(1);
  }
  const double var1 = q1 / reps - (s1 / reps) * (s1 / reps);
  const double var2 = q2 / reps - (s2 / reps) * (s2 / reps);
  EXPECT_NEAR(var1, 0.05, 0.2 * 0.05);
  EXPECT_NEAR(var2, 1.0, 0.2);
  EXPECT_NEAR(cross / reps / std::sqrt(var1 * var2), 0.0, 0.05);
}

TEST(ObservationLogLikelihood, ExactMatch) {
  const CellState x{800.0, 2.0, 50.0};
  const double expected = -0.5 * std::log(2.0 * std::numbers::pi * 0.05) - 0.5 * std::log(2.0 * std::numbers::pi);
  EXPECT_NEAR(observation_log_likelihood(measure(x), x, MeasurementNoise{}), expected, 1e-12);
  EXPECT_NEAR(observation_log_likelihood(measure(x), x, MeasurementNoise{}), -0.3400, 1e-3);
}

TEST(ObservationLogLikelihood, DecreasesWithResidual) {
  const CellState x{800.0, 2.0, 50.0};
  double last = std::numeric_limits<double>::infinity();
  for (double r = 0.0; r < 20.0; r += 0.5) {
    const double ll = observation_log_likelihood(Observation{802.0, 50.0 + r}, x, MeasurementNoise{});
    EXPECT_LT(ll, last);
    last = ll;
  }
}

TEST(ObservationLogLikelihood, ChannelsAreNotInterchangeable) {
  const CellState x{800.0, 2.0, 50.0};
  const MeasurementNoise noise;
  EXPECT_NE(observation_log_likelihood(Observation{803.0, 50.0}, x, noise),
            observation_log_likelihood(Observation{802.0, 51.0}, x, noise));
}

TEST(SimulateTruth, ZeroNoiseObservationsAreExact) {
  MeasurementNoise noise;
  noise.var_tsum = 0.0;
  noise.var_v = 0.0;
  xnpf::Stream rng(3);
  const Trajectory traj = simulate_truth(Params{}, BetaSchedule{}, noise, 30, CellState{1000.0, 0.0, 1e-3}, rng);
  for (std::size_t t = 0; t < traj.size(); ++t) {
    EXPECT_EQ(traj.observations[t], measure(traj.states[t]));
  }
}

TEST(SimulateTruth, LengthDeterminismAndSupport) {
  xnpf::Stream a(4);
  xnpf::Stream b(4);
  const CellState init{1000.0, 0.0, 1e-3};
  const Trajectory ta = simulate_truth(Params{}, BetaSchedule{}, MeasurementNoise{}, 190, init, a);
  const Trajectory tb = simulate_truth(Params{}, BetaSchedule{}, MeasurementNoise{}, 190, init, b);
  ASSERT_EQ(ta.size(), 190U);
  EXPECT_EQ(ta.observations.size(), 190U);
  EXPECT_EQ(ta.times.front(), 1.0);
  EXPECT_EQ(ta.times.back(), 190.0);
  for (std::size_t t = 0; t < ta.size(); ++t) {
    EXPECT_EQ(ta.states[t], tb.states[t]);
    EXPECT_EQ(ta.observations[t], tb.observations[t]);
    EXPECT_TRUE((ta.states[t].array() >= 0.0).all());
    EXPECT_TRUE(ta.states[t].allFinite());
  }
  EXPECT_THROW(simulate_truth(Params{}, BetaSchedule{}, MeasurementNoise{}, 0, init, a), xnpf::Error);
}

TEST(SimulateTruth, DynamicsIgnoreMeasurementNoise) {
  xnpf::Stream a(5);
  xnpf::Stream b(6);
  const CellState init{1000.0, 0.0, 1e-3};
  const Trajectory ta = simulate_truth(Params{}, BetaSchedule{}, MeasurementNoise{}, 40, init, a);
  const Trajectory tb = simulate_truth(Params{}, BetaSchedule{}, MeasurementNoise{}, 40, init, b);
  for (std::size_t t = 0; t < ta.size(); ++t) {
    EXPECT_EQ(ta.states[t], tb.states[t]);
  }
  EXPECT_NE(ta.observations[0], tb.observations[0]);
}

TEST(TrajectoryCsv, RoundTrip) {
  xnpf::Stream rng(7);
  const Trajectory traj =
      simulate_truth(Params{}, BetaSchedule{}, MeasurementNoise{}, 12, CellState{1000.0, 0.0, 1e-3}, rng);
  std::stringstream buffer;
  write_trajectory_csv(buffer, traj);
  std::string header;
  std::getline(std::istringstream(buffer.str()), header);
  EXPECT_EQ(header, kTrajectoryHeader);
  const Trajectory back = read_trajectory_csv(buffer);
  ASSERT_EQ(back.size(), traj.size());
  for (std::size_t t = 0; t < traj.size(); ++t) {
    EXPECT_EQ(back.times[t], traj.times[t]);
    EXPECT_EQ(back.states[t], traj.states[t]);
    EXPECT_EQ(back.beta[t], traj.beta[t]);
    EXPECT_EQ(back.observations[t], traj.observations[t]);
  }
  std::istringstream bad("t,T\n1,2\n");
  EXPECT_THROW(read_trajectory_csv(bad), xnpf::Error);
}

FilterModel quiet_model() { return FilterModel(Params{}, MeasurementNoise{}, TransitionNoise{0.0, 0.0}); }

TEST(FilterModel, ZeroNoiseSampleIsImage) {
  const FilterModel model = quiet_model();
  VectorXd x(4);
  x << 900.0, 3.0, 100.0, std::log(7.26e-6);
  xnpf::Stream rng(8);
  const VectorXd image = model.predict(x, 0);
  EXPECT_EQ(xnpf::sample_transition(model, x, 0, rng), image);
  EXPECT_EQ(xnpf::transition_log_density(model, image, x, 0), 0.0);
  EXPECT_EQ(image(kLogBeta), x(kLogBeta));
}

TEST(FilterModel, ImageMatchesConstantBetaIntegration) {
  const FilterModel model = quiet_model();
  VectorXd x(4);
  x << 900.0, 3.0, 100.0, std::log(3.63e-4);
  const CellState expected =
      integrate(CellState{900.0, 3.0, 100.0}, 0.0, 1.0, 0.01, BetaInput::constant(std::exp(x(kLogBeta))), Params{});
  EXPECT_EQ(CellState(model.predict(x, 7).head<3>()), expected);
}

TEST(FilterModel, DensityModeSymmetryAndNormalization) {
  const FilterModel model(Params{}, MeasurementNoise{}, TransitionNoise{10.0, 0.05});
  VectorXd image(4);
  image << 800.0, 5.0, 300.0, -9.0;
  const double mode = model.transition_log_density_about(image, image);
  const double expected = -2.0 * std::log(2.0 * std::numbers::pi) - 3.0 * std::log(10.0) - std::log(0.05);
  EXPECT_NEAR(mode, expected, 1e-12);
  xnpf::Stream rng(9);
  for (int rep = 0; rep < 100; ++rep) {
    VectorXd delta(4);
    for (Eigen::Index j = 0; j < 4; ++j) {
      delta(j) = rng.normal() * (j == 3 ? 0.05 : 10.0);
    }
    EXPECT_NEAR(model.transition_log_density_about(image + delta, image),
                model.transition_log_density_about(image - delta, image), 1e-12);
  }
  // Integrate along the v axis with the other components at their image values.
  const double mass = xnpf::testing::trapezoid(
      [&](double v) {
        VectorXd x = image;
        x(kVirus) = v;
        return std::exp(model.transition_log_density_about(x, image) - model.transition_log_density_about(image, image)) /
               (std::sqrt(2.0 * std::numbers::pi) * 10.0);
      },
      200.0, 400.0, 20000);
  EXPECT_NEAR(mass, 1.0, 1e-6);
}

TEST(FilterModel, PerturbClampsCells) {
  const FilterModel model(Params{}, MeasurementNoise{}, TransitionNoise{10.0, 0.05});
  VectorXd image(4);
  image << 0.5, 0.0, 0.1, -9.0;
  xnpf::Stream rng(10);
  for (int rep = 0; rep < 1000; ++rep) {
    const VectorXd x = model.perturb(image, rng);
    EXPECT_TRUE((x.head<3>().array() >= 0.0).all());
  }
}

TEST(FilterModel, ObservationMatchesFreeFunction) {
  const FilterModel model = quiet_model();
  VectorXd x(4);
  x << 800.0, 2.0, 50.0, -5.0;
  const Observation z{802.5, 49.0};
  EXPECT_EQ(model.observation_log_likelihood(VectorXd(z), x),
            observation_log_likelihood(z, CellState{800.0, 2.0, 50.0}, MeasurementNoise{}));
}

TEST(InitialCloud, SizeWeightsAndSupport) {
  xnpf::Stream rng(11);
  const xnpf::Cloud c = initial_cloud(CellState{1000.0, 0.0, 1e-3}, 7.26e-6, InitialSpread{}, 50, rng);
  EXPECT_EQ(c.size(), 50);
  EXPECT_EQ(c.dim(), 4);
  EXPECT_TRUE(xnpf::is_normalized(c.weights));
  EXPECT_TRUE((c.states.topRows(3).array() >= 0.0).all());
  EXPECT_THROW(initial_cloud(CellState{1000.0, 0.0, 1e-3}, 7.26e-6, InitialSpread{}, 0, rng), xnpf::ConfigError);
}

}  // namespace
