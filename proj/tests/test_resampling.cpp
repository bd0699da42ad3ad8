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

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <xnpf/resampling.hpp>

#include "oracles.hpp"

#include <cmath>
#include <vector>

namespace {

using ::testing::ElementsAre;
using xnpf::Cloud;
using xnpf::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Cloud labelled_cloud(const VectorXd& weights) {
  const Index n = weights.size();
  MatrixXd s(1, n);
  for (Index i = 0; i < n; ++i) {
    s(0, i) = static_cast<double>(i);
  }
  return Cloud(s, weights, 4);
}

TEST(SusIndices, AllMassOnFirst) {
  EXPECT_THAT(xnpf::sus_indices(VectorXd{{1.0, 0.0, 0.0}}, 0.2), ElementsAre(0, 0, 0));
}

TEST(SusIndices, HandTrace) {
  const auto idx = xnpf::sus_indices(VectorXd{{0.5, 0.3, 0.2}}, 0.1, 5);
  EXPECT_THAT(xnpf::copy_counts(idx, 3), ElementsAre(2, 2, 1));
}

TEST(SusIndices, UniformWeightsSelectEachOnce) {
  for (double u : {1e-6, 0.05, 0.1, 0.19999}) {
    EXPECT_THAT(xnpf::copy_counts(xnpf::sus_indices(VectorXd::Constant(5, 0.2), u), 5),
                ElementsAre(1, 1, 1, 1, 1));
  }
}

TEST(SusIndices, TiesGoToLaterParticle) {
  // The second pointer lands exactly on the first cumulative boundary.
  EXPECT_THAT(xnpf::sus_indices(VectorXd{{0.5, 0.5}}, 0.0), ElementsAre(0, 1));
}

TEST(SusIndices, RejectsUnnormalizedWeights) {
  EXPECT_THROW(xnpf::sus_indices(VectorXd{{0.5, 0.6}}, 0.1), xnpf::WeightsNotNormalized);
  xnpf::Stream rng(1);
  EXPECT_THROW(xnpf::sus_resample(labelled_cloud(VectorXd{{2.0, 0.0}}), rng), xnpf::WeightsNotNormalized);
  EXPECT_THROW(xnpf::multinomial_resample(labelled_cloud(VectorXd{{0.2, 0.2}}), rng), xnpf::WeightsNotNormalized);
}

TEST(SusResample, ConsumesOneDraw) {
  xnpf::Stream a(99);
  xnpf::Stream b(99);
  xnpf::sus_resample(labelled_cloud(VectorXd::Constant(8, 0.125)), a);
  b.uniform();
  EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(MultinomialResample, ConsumesNDraws) {
  xnpf::Stream a(99);
  xnpf::Stream b(99);
  xnpf::multinomial_resample(labelled_cloud(VectorXd::Constant(8, 0.125)), a);
  for (int i = 0; i < 8; ++i) {
    b.uniform();
  }
  EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(MultinomialResample, DeterministicSupport) {
  xnpf::Stream rng(2);
  const Cloud out = xnpf::multinomial_resample(labelled_cloud(VectorXd{{1.0, 0.0}}), rng);
  EXPECT_EQ(out.states, MatrixXd::Zero(1, 2));
}

TEST(MultinomialResample, FairCoinFrequency) {
  xnpf::Stream rng(8);
  std::size_t zeros = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    zeros += xnpf::multinomial_indices(VectorXd{{0.5, 0.5}}, rng)[0] == 0 ? 1 : 0;
  }
  EXPECT_GE(zeros, 4800U);
  EXPECT_LE(zeros, 5200U);
}

TEST(MultinomialResample, SingleParticle) {
  xnpf::Stream rng(4);
  EXPECT_THAT(xnpf::multinomial_indices(VectorXd{{1.0}}, rng), ElementsAre(0));
}

TEST(Resample, OutputIsUniformCopyOfInput) {
  xnpf::Stream rng(21);
  for (auto scheme : {xnpf::ResampleScheme::kSus, xnpf::ResampleScheme::kMultinomial}) {
    for (int rep = 0; rep < 200; ++rep) {
      const Index n = 1 + static_cast<Index>(rng.below(64));
      const Cloud in = labelled_cloud(xnpf::testing::random_weights(n, rng));
      const Cloud out = xnpf::resample(in, scheme, rng);
      ASSERT_EQ(out.size(), n);
      EXPECT_EQ(out.time_index, in.time_index);
      EXPECT_TRUE((out.weights.array() == 1.0 / static_cast<double>(n)).all());
      for (Index i = 0; i < n; ++i) {
        const auto src = static_cast<Index>(out.states(0, i));
        ASSERT_GE(src, 0);
        ASSERT_LT(src, n);
        EXPECT_GT(in.weights(src), 0.0);
      }
    }
  }
}

TEST(SusResample, CopyCountsWithinFloorAndCeiling) {
  xnpf::Stream rng(31);
  for (int rep = 0; rep < 2000; ++rep) {
    const Index n = 1 + static_cast<Index>(rng.below(64));
    const VectorXd w = xnpf::testing::random_weights(n, rng);
    const auto counts = xnpf::copy_counts(xnpf::sus_indices(w, rng), n);
    for (Index i = 0; i < n; ++i) {
      const double expected = static_cast<double>(n) * w(i);
      const auto c = static_cast<double>(counts[static_cast<std::size_t>(i)]);
      EXPECT_GE(c, std::floor(expected - 1e-9));
      EXPECT_LE(c, std::ceil(expected + 1e-9));
    }
  }
}

TEST(Resample, CountsMatchWeightsInExpectation) {
  const VectorXd w{{0.05, 0.1, 0.15, 0.2, 0.5}};
  const int reps = 10000;
  xnpf::Stream rng(41);
  for (auto scheme : {xnpf::ResampleScheme::kSus, xnpf::ResampleScheme::kMultinomial}) {
    std::vector<double> totals(5, 0.0);
    for (int rep = 0; rep < reps; ++rep) {
      const auto idx = scheme == xnpf::ResampleScheme::kSus ? xnpf::sus_indices(w, rng) : xnpf::multinomial_indices(w, rng);
      for (Index i : idx) {
        totals[static_cast<std::size_t>(i)] += 1.0;
      }
    }
    std::vector<double> expected(5);
    for (Index i = 0; i < 5; ++i) {
      expected[static_cast<std::size_t>(i)] = reps * 5 * w(i);
    }
    // SUS draws are strongly negatively correlated, so its pooled statistic sits far below the
    // critical value; the multinomial statistic is chi-square with 4 degrees of freedom.
    const auto chi = xnpf::testing::pearson(totals, expected);
    EXPECT_LT(chi.statistic, xnpf::testing::chi_square_critical(chi.dof, 0.01)) << xnpf::to_string(scheme);
  }
}

TEST(Resample, SusVarianceNotAboveMultinomial) {
  xnpf::Stream rng(51);
  const VectorXd w{{0.07, 0.33, 0.1, 0.25, 0.25}};
  const int reps = 5000;
  std::vector<double> sus_sq(5, 0.0), mult_sq(5, 0.0);
  for (int rep = 0; rep < reps; ++rep) {
    const auto s = xnpf::copy_counts(xnpf::sus_indices(w, rng), 5);
    const auto m = xnpf::copy_counts(xnpf::multinomial_indices(w, rng), 5);
    for (std::size_t i = 0; i < 5; ++i) {
      const double e = 5.0 * w(static_cast<Index>(i));
      sus_sq[i] += (static_cast<double>(s[i]) - e) * (static_cast<double>(s[i]) - e);
      mult_sq[i] += (static_cast<double>(m[i]) - e) * (static_cast<double>(m[i]) - e);
    }
  }
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_LE(sus_sq[i], mult_sq[i]) << "particle " << i;
  }
}

TEST(ResampleScheme, NamesRoundTrip) {
  for (auto scheme : {xnpf::ResampleScheme::kSus, xnpf::ResampleScheme::kMultinomial}) {
    EXPECT_EQ(xnpf::parse_resample_scheme(xnpf::to_string(scheme)), scheme);
  }
  EXPECT_THROW(xnpf::parse_resample_scheme("systematic"), xnpf::ConfigError);
}

}  // namespace
