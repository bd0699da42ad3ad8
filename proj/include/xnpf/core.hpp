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

#ifndef XNPF_CORE_HPP
#define XNPF_CORE_HPP

#include <xnpf/errors.hpp>
#include <xnpf/random.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <vector>

/**
 * \file
 * \brief Weighted particle representations of a posterior and their summary statistics.
 */

namespace xnpf {

using Index = Eigen::Index;

template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Tolerance used to decide whether a weight vector counts as normalized.
inline constexpr double kNormalizationTolerance = 1e-9;

/// N weighted states. States are stored column-wise (d x N).
template <class Scalar = double>
struct ParticleCloud {
  Matrix<Scalar> states;
  Vector<Scalar> weights;
  std::size_t time_index = 0;

  ParticleCloud() = default;
  ParticleCloud(Matrix<Scalar> s, Vector<Scalar> w, std::size_t t = 0)
      : states(std::move(s)), weights(std::move(w)), time_index(t) {}

  /// Cloud of `n` copies of the zero state with uniform weights.
  static ParticleCloud uniform(Index dim, Index n) {
    return ParticleCloud(Matrix<Scalar>::Zero(dim, n), Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n)));
  }

  [[nodiscard]] Index size() const { return weights.size(); }
  [[nodiscard]] Index dim() const { return states.rows(); }
  auto state(Index i) { return states.col(i); }
  auto state(Index i) const { return states.col(i); }

  friend bool operator==(const ParticleCloud& a, const ParticleCloud& b) {
    return a.time_index == b.time_index && a.states.rows() == b.states.rows() &&
           a.states.cols() == b.states.cols() && a.weights.size() == b.weights.size() &&
           a.states == b.states && a.weights == b.weights;
  }
};

using Cloud = ParticleCloud<double>;

/// True when the weights are non-negative, finite and sum to one within `tolerance`.
template <class Derived>
bool is_normalized(const Eigen::MatrixBase<Derived>& weights, double tolerance = kNormalizationTolerance) {
  if (weights.size() == 0 || !weights.allFinite() || (weights.array() < 0).any()) {
    return false;
  }
  return std::abs(static_cast<double>(weights.sum()) - 1.0) <= tolerance;
}

/// Divides the weights by their sum. Throws AllWeightsZero if the sum is not positive and finite.
template <class Derived>
Vector<typename Derived::Scalar> normalize_weights(const Eigen::MatrixBase<Derived>& weights) {
  using Scalar = typename Derived::Scalar;
  const Scalar total = weights.sum();
  if (!(total > Scalar(0)) || !std::isfinite(static_cast<double>(total)) || (weights.array() < 0).any()) {
    throw AllWeightsZero();
  }
  return weights / total;
}

template <class Scalar>
ParticleCloud<Scalar> normalize_weights(ParticleCloud<Scalar> cloud) {
  cloud.weights = normalize_weights(cloud.weights);
  return cloud;
}

/// Converts log-weights to normalized linear weights, shifting by the maximum first.
template <class Derived>
Vector<typename Derived::Scalar> weights_from_log(const Eigen::MatrixBase<Derived>& log_weights) {
  using Scalar = typename Derived::Scalar;
  Scalar max_log = -std::numeric_limits<Scalar>::infinity();
  for (Index i = 0; i < log_weights.size(); ++i) {
    const Scalar lw = log_weights(i);
    if (!std::isnan(lw)) {
      max_log = std::max(max_log, lw);
    }
  }
  if (!std::isfinite(static_cast<double>(max_log))) {
    throw AllWeightsZero();
  }
  Vector<Scalar> weights(log_weights.size());
  for (Index i = 0; i < log_weights.size(); ++i) {
    const Scalar lw = log_weights(i);
    weights(i) = std::isnan(lw) ? Scalar(0) : std::exp(lw - max_log);
  }
  return normalize_weights(weights);
}

/// Weighted posterior mean sum_i w_i x_i. Zero-weight particles are skipped, so
/// non-finite states carrying no mass do not poison the estimate.
template <class Scalar>
Vector<Scalar> posterior_mean(const ParticleCloud<Scalar>& cloud) {
  Vector<Scalar> mean = Vector<Scalar>::Zero(cloud.dim());
  for (Index i = 0; i < cloud.size(); ++i) {
    if (cloud.weights(i) > Scalar(0)) {
      mean.noalias() += cloud.weights(i) * cloud.states.col(i);
    }
  }
  return mean;
}

/// 1 / sum_i w_i^2 for a normalized weight vector.
template <class Derived>
typename Derived::Scalar effective_sample_size(const Eigen::MatrixBase<Derived>& weights) {
  return typename Derived::Scalar(1) / weights.squaredNorm();
}

template <class Scalar>
Scalar effective_sample_size(const ParticleCloud<Scalar>& cloud) {
  return effective_sample_size(cloud.weights);
}

template <class Scalar>
struct HistogramBin {
  Scalar lower_edge;
  std::size_t count;
};

/// Counts of weights in `bins` equal-width bins over [0, max weight]. The maximum falls in the last bin.
template <class Derived>
std::vector<HistogramBin<typename Derived::Scalar>> weight_histogram(const Eigen::MatrixBase<Derived>& weights,
                                                                     std::size_t bins) {
  using Scalar = typename Derived::Scalar;
  if (bins == 0) {
    throw Error("weight_histogram requires at least one bin");
  }
  const Scalar top = weights.size() > 0 ? weights.maxCoeff() : Scalar(0);
  const Scalar width = top / static_cast<Scalar>(bins);
  std::vector<HistogramBin<Scalar>> histogram(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    histogram[b] = {width * static_cast<Scalar>(b), 0};
  }
  for (Index i = 0; i < weights.size(); ++i) {
    std::size_t b = bins - 1;
    if (width > Scalar(0)) {
      b = std::min(bins - 1, static_cast<std::size_t>(weights(i) / width));
    }
    ++histogram[b].count;
  }
  return histogram;
}

template <class Scalar>
std::vector<HistogramBin<Scalar>> weight_histogram(const ParticleCloud<Scalar>& cloud, std::size_t bins) {
  return weight_histogram(cloud.weights, bins);
}

/// Root-mean-square difference of two equally long series.
template <class Range>
double rmse_series(const Range& estimates, const Range& truth) {
  const auto n = static_cast<std::size_t>(std::size(estimates));
  if (n != static_cast<std::size_t>(std::size(truth))) {
    throw LengthMismatch(n, static_cast<std::size_t>(std::size(truth)));
  }
  if (n == 0) {
    throw Error("rmse_series requires non-empty series");
  }
  double sum = 0.0;
  auto e = std::begin(estimates);
  auto t = std::begin(truth);
  for (; e != std::end(estimates); ++e, ++t) {
    const double diff = static_cast<double>(*e) - static_cast<double>(*t);
    sum += diff * diff;
  }
  return std::sqrt(sum / static_cast<double>(n));
}

/// Contract every model driven by the filters satisfies.
///
/// The transition is split into a deterministic image `predict(x, t)` and a perturbation
/// `perturb(image, rng)`, so a filter step integrates each particle once and reuses the image
/// for both sampling and density evaluation. `transition_variance()` is the diagonal of the
/// perturbation covariance.
template <class M>
concept StateSpaceModel = requires(const M& model, const Vector<typename M::Scalar>& x, Stream& rng, std::size_t t) {
  typename M::Scalar;
  { model.state_dim() } -> std::convertible_to<Index>;
  { model.obs_dim() } -> std::convertible_to<Index>;
  { model.predict(x, t) } -> std::convertible_to<Vector<typename M::Scalar>>;
  { model.perturb(x, rng) } -> std::convertible_to<Vector<typename M::Scalar>>;
  { model.transition_log_density_about(x, x) } -> std::convertible_to<typename M::Scalar>;
  { model.observation_log_likelihood(x, x) } -> std::convertible_to<typename M::Scalar>;
  { model.transition_variance() } -> std::convertible_to<Vector<typename M::Scalar>>;
};

/// Draws x_t ~ p(. | x_{t-1}).
template <StateSpaceModel Model>
Vector<typename Model::Scalar> sample_transition(const Model& model, const Vector<typename Model::Scalar>& previous,
                                                 std::size_t t, Stream& rng) {
  return model.perturb(model.predict(previous, t), rng);
}

/// log p(x_t | x_{t-1}).
template <StateSpaceModel Model>
typename Model::Scalar transition_log_density(const Model& model, const Vector<typename Model::Scalar>& next,
                                              const Vector<typename Model::Scalar>& previous, std::size_t t) {
  return model.transition_log_density_about(next, model.predict(previous, t));
}

}  // namespace xnpf

#endif
