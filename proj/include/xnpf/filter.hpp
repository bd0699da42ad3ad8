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

#ifndef XNPF_FILTER_HPP
#define XNPF_FILTER_HPP

#include <xnpf/core.hpp>
#include <xnpf/resampling.hpp>
#include <xnpf/xnes.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

/**
 * \file
 * \brief The exponential natural particle filter and the bootstrap baseline.
 *
 * Every step predicts each particle through the model, then splits the particles into two
 * classes. Class A (exploration) is propagated with the model's own transition kernel. Class B
 * (exploitation) is drawn from a Gaussian fitted by xNES to the current observation likelihood,
 * starting from the moments of the predictive distribution. All particles are then reweighted
 * against the two-component mixture proposal
 *
 *   q(x) = alpha_B * N(x; m, sigma^2 B B^T) + alpha_A * p(x | x_prev)
 *
 * and the cloud is resampled.
 */

namespace xnpf {

/// How the two mixture components are weighted in the importance-weight denominator.
enum class MixtureCoefficients {
  /// alpha_A = |A| / N on the transition kernel, alpha_B = |B| / N on the xNES Gaussian.
  kClassFractions,
  /// alpha_B = partition on the xNES Gaussian, alpha_A = 1 - partition on the transition kernel.
  kPartitionParameter,
};

inline std::string_view to_string(MixtureCoefficients m) {
  return m == MixtureCoefficients::kClassFractions ? "class_fractions" : "partition_parameter";
}

inline MixtureCoefficients parse_mixture_coefficients(std::string_view name) {
  if (name == "class_fractions") {
    return MixtureCoefficients::kClassFractions;
  }
  if (name == "partition_parameter") {
    return MixtureCoefficients::kPartitionParameter;
  }
  throw ConfigError("unknown mixture coefficients '" + std::string(name) + "'");
}

struct XnpfConfig {
  Index particles = 10;
  double partition = 0.2;
  /// Class-A transition noise scale on the physical states. Read by model factories.
  double transition_step = 10.0;
  XnesConfig xnes{};
  ResampleScheme resampler = ResampleScheme::kSus;
  MixtureCoefficients mixture = MixtureCoefficients::kClassFractions;
  /// Resample when ESS < threshold * N. Any value >= 1 resamples every step.
  double resample_threshold = 1.0;

  friend bool operator==(const XnpfConfig&, const XnpfConfig&) = default;
};

struct ClassPartition {
  std::vector<Index> class_a;
  std::vector<Index> class_b;
};

/// |A| = ceil(partition * N), guarded against products that round just above an integer.
inline Index class_a_size(Index n, double partition) {
  const double raw = partition * static_cast<double>(n);
  const auto size = static_cast<Index>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::clamp<Index>(size, 0, n);
}

/// Uniformly random subset of size ceil(partition * N) forms class A; the rest is class B.
/// Both index lists are sorted.
inline ClassPartition partition_particles(Index n, double partition, Stream& rng) {
  if (n < 1 || !(partition >= 0.0 && partition <= 1.0)) {
    throw Error("partition_particles requires N >= 1 and partition in [0, 1]");
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    perm[static_cast<std::size_t>(i)] = i;
  }
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  const auto size_a = static_cast<std::ptrdiff_t>(class_a_size(n, partition));
  ClassPartition out;
  out.class_a.assign(perm.begin(), perm.begin() + size_a);
  out.class_b.assign(perm.begin() + size_a, perm.end());
  std::sort(out.class_a.begin(), out.class_a.end());
  std::sort(out.class_b.begin(), out.class_b.end());
  return out;
}

struct MixtureWeights {
  double class_a;
  double class_b;
};

inline MixtureWeights mixture_weights(const ClassPartition& partition, const XnpfConfig& cfg) {
  if (cfg.mixture == MixtureCoefficients::kPartitionParameter) {
    return {1.0 - cfg.partition, cfg.partition};
  }
  const auto n = static_cast<double>(partition.class_a.size() + partition.class_b.size());
  return {static_cast<double>(partition.class_a.size()) / n, static_cast<double>(partition.class_b.size()) / n};
}

/// log(alpha_B * exp(log_q) + alpha_A * exp(log_p)), exact when one coefficient is zero.
template <class Scalar>
Scalar log_mixture(Scalar log_q, Scalar log_p, double alpha_a, double alpha_b) {
  constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();
  if (alpha_b == 0.0) {
    return alpha_a == 1.0 ? log_p : static_cast<Scalar>(std::log(alpha_a)) + log_p;
  }
  if (alpha_a == 0.0) {
    return alpha_b == 1.0 ? log_q : static_cast<Scalar>(std::log(alpha_b)) + log_q;
  }
  const Scalar a = static_cast<Scalar>(std::log(alpha_b)) + log_q;
  const Scalar b = static_cast<Scalar>(std::log(alpha_a)) + log_p;
  const Scalar hi = std::max(a, b);
  if (hi == kNegInf || std::isnan(hi)) {
    return kNegInf;
  }
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

/// log q_mix(x_t) for one particle.
template <StateSpaceModel Model, class StateA, class StateB>
typename Model::Scalar mixture_log_density(const StateA& next, const StateB& previous,
                                          const SearchDistribution<typename Model::Scalar>& dist, const Model& model,
                                          std::size_t t, double alpha_a, double alpha_b) {
  using Scalar = typename Model::Scalar;
  const Scalar log_p =
      alpha_a > 0.0 ? transition_log_density(model, Vector<Scalar>(next), Vector<Scalar>(previous), t) : Scalar(0);
  const Scalar log_q = alpha_b > 0.0 ? gaussian_log_density(dist, next) : Scalar(0);
  return log_mixture(log_q, log_p, alpha_a, alpha_b);
}

/// Deterministic transition image of every particle, column-wise.
template <StateSpaceModel Model>
Matrix<typename Model::Scalar> predict_all(const ParticleCloud<typename Model::Scalar>& cloud, const Model& model) {
  using Scalar = typename Model::Scalar;
  Matrix<Scalar> images(cloud.dim(), cloud.size());
  for (Index i = 0; i < cloud.size(); ++i) {
    images.col(i) = model.predict(Vector<Scalar>(cloud.states.col(i)), cloud.time_index);
  }
  return images;
}

/// Draws x_t ~ p(. | x_{t-1}) for the listed particles, in list order, into `states`.
template <StateSpaceModel Model>
void propagate_class_a(const Matrix<typename Model::Scalar>& images, const std::vector<Index>& indices,
                       const Model& model, Stream& rng, Matrix<typename Model::Scalar>& states) {
  using Scalar = typename Model::Scalar;
  for (Index i : indices) {
    states.col(i) = model.perturb(Vector<Scalar>(images.col(i)), rng);
  }
}

/// `count` i.i.d. draws from N(m, sigma^2 B B^T), column-wise.
template <class Scalar>
Matrix<Scalar> sample_class_b(Index count, const SearchDistribution<Scalar>& dist, Stream& rng) {
  if (count == 0) {
    return Matrix<Scalar>(dist.dim(), 0);
  }
  return sample_population(dist, count, rng).points;
}

/// Mean and covariance of the predictive mixture sum_i w_i p(. | x_i): the weighted moments of
/// the transition images plus the kernel's own noise. Non-finite images are skipped.
template <StateSpaceModel Model>
std::pair<Vector<typename Model::Scalar>, Matrix<typename Model::Scalar>> predictive_moments(
    const Matrix<typename Model::Scalar>& images, const Vector<typename Model::Scalar>& weights, const Model& model) {
  using Scalar = typename Model::Scalar;
  const Index d = images.rows();
  Vector<Scalar> mean = Vector<Scalar>::Zero(d);
  Scalar total = 0;
  for (Index i = 0; i < images.cols(); ++i) {
    if (weights(i) > Scalar(0) && images.col(i).allFinite()) {
      mean.noalias() += weights(i) * images.col(i);
      total += weights(i);
    }
  }
  if (!(total > Scalar(0))) {
    throw AllWeightsZero();
  }
  mean /= total;
  Matrix<Scalar> cov = Matrix<Scalar>::Zero(d, d);
  for (Index i = 0; i < images.cols(); ++i) {
    if (weights(i) > Scalar(0) && images.col(i).allFinite()) {
      const Vector<Scalar> centered = images.col(i) - mean;
      cov.noalias() += (weights(i) / total) * centered * centered.transpose();
    }
  }
  cov.diagonal() += model.transition_variance();
  return {std::move(mean), std::move(cov)};
}

/// Fits the class-B Gaussian: xNES maximizing log p(z_t | x), started from the given moments
/// regularized by eps * I with eps = 1e-8 * (trace / d), or 1e-8 for a zero covariance.
template <StateSpaceModel Model>
XnesResult<typename Model::Scalar> fit_proposal(const Vector<typename Model::Scalar>& mean,
                                                const Matrix<typename Model::Scalar>& cov,
                                                const Vector<typename Model::Scalar>& observation, const Model& model,
                                                const XnesConfig& cfg, Stream& rng) {
  using Scalar = typename Model::Scalar;
  const Index d = mean.size();
  const Scalar scale = cov.trace() / static_cast<Scalar>(d);
  const Scalar eps = Scalar(1e-8) * (scale > Scalar(0) ? scale : Scalar(1));
  Matrix<Scalar> regularized = Scalar(0.5) * (cov + cov.transpose());
  regularized.diagonal().array() += eps;
  const auto init = SearchDistribution<Scalar>::from_covariance(mean, regularized);
  auto fitness = [&](const Vector<Scalar>& x) { return model.observation_log_likelihood(observation, x); };
  return run_xnes(fitness, init, cfg, rng);
}

/// log w_t = log p(z | x) + log p(x | x_prev) - log q(x) + log w_{t-1}, then normalized.
/// `cloud` holds the new states and the previous weights.
template <StateSpaceModel Model>
ParticleCloud<typename Model::Scalar> update_weights(ParticleCloud<typename Model::Scalar> cloud,
                                                     const Vector<typename Model::Scalar>& observation,
                                                     const Vector<typename Model::Scalar>& log_transition,
                                                     const Vector<typename Model::Scalar>& log_proposal,
                                                     const Model& model) {
  using Scalar = typename Model::Scalar;
  Vector<Scalar> log_weights(cloud.size());
  for (Index i = 0; i < cloud.size(); ++i) {
    const Scalar log_lik = model.observation_log_likelihood(observation, Vector<Scalar>(cloud.states.col(i)));
    // Equal densities give an exact zero correction, which keeps the bootstrap limit bit-exact.
    const Scalar correction = log_transition(i) == log_proposal(i) ? Scalar(0) : log_transition(i) - log_proposal(i);
    log_weights(i) = log_lik + correction + std::log(cloud.weights(i));
  }
  cloud.weights = weights_from_log(log_weights);
  return cloud;
}

template <class Scalar = double>
struct StepMetrics {
  /// Effective sample size of the reweighted cloud, before resampling.
  Scalar ess = 0;
  std::size_t likelihood_evals = 0;
  std::size_t class_a = 0;
  std::size_t class_b = 0;
  bool resampled = false;
  /// Weighted posterior mean before resampling.
  Vector<Scalar> estimate;
  /// Normalized weights before resampling.
  Vector<Scalar> weights;
};

template <class Scalar = double>
struct StepResult {
  ParticleCloud<Scalar> cloud;
  StepMetrics<Scalar> metrics;
};

namespace detail {

template <class Scalar>
StepResult<Scalar> finish_step(ParticleCloud<Scalar> weighted, StepMetrics<Scalar> metrics, const XnpfConfig& cfg,
                               Stream& rng) {
  metrics.ess = effective_sample_size(weighted.weights);
  metrics.estimate = posterior_mean(weighted);
  metrics.weights = weighted.weights;
  const bool always = cfg.resample_threshold >= 1.0;
  metrics.resampled =
      always || metrics.ess < static_cast<Scalar>(cfg.resample_threshold) * static_cast<Scalar>(weighted.size());
  if (metrics.resampled) {
    return {resample(weighted, cfg.resampler, rng), std::move(metrics)};
  }
  return {std::move(weighted), std::move(metrics)};
}

template <class Scalar>
void require_step_inputs(const ParticleCloud<Scalar>& cloud) {
  if (cloud.size() < 1) {
    throw Error("filter step requires a non-empty cloud");
  }
  if (!is_normalized(cloud.weights)) {
    throw WeightsNotNormalized();
  }
}

}  // namespace detail

/// One bootstrap step: propagate every particle by the kernel, w *= p(z | x), normalize, resample.
template <StateSpaceModel Model>
StepResult<typename Model::Scalar> bootstrap_step(const ParticleCloud<typename Model::Scalar>& cloud,
                                                  const Vector<typename Model::Scalar>& observation,
                                                  const Model& model, const XnpfConfig& cfg,
                                                  FilterStreams& streams) {
  using Scalar = typename Model::Scalar;
  detail::require_step_inputs(cloud);
  const Index n = cloud.size();
  const Matrix<Scalar> images = predict_all(cloud, model);

  ParticleCloud<Scalar> next(Matrix<Scalar>(cloud.dim(), n), cloud.weights, cloud.time_index + 1);
  std::vector<Index> all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    all[static_cast<std::size_t>(i)] = i;
  }
  propagate_class_a(images, all, model, streams.class_a, next.states);

  const Vector<Scalar> zeros = Vector<Scalar>::Zero(n);
  next = update_weights(std::move(next), observation, zeros, zeros, model);

  StepMetrics<Scalar> metrics;
  metrics.likelihood_evals = static_cast<std::size_t>(n);
  metrics.class_a = static_cast<std::size_t>(n);
  return detail::finish_step(std::move(next), std::move(metrics), cfg, streams.resample);
}

/// One xNPF step: partition, propagate class A, fit and sample class B, reweight every particle
/// against the mixture proposal, resample.
template <StateSpaceModel Model>
StepResult<typename Model::Scalar> xnpf_step(const ParticleCloud<typename Model::Scalar>& cloud,
                                             const Vector<typename Model::Scalar>& observation, const Model& model,
                                             const XnpfConfig& cfg, FilterStreams& streams) {
  using Scalar = typename Model::Scalar;
  detail::require_step_inputs(cloud);
  const Index n = cloud.size();
  const Matrix<Scalar> images = predict_all(cloud, model);
  const ClassPartition partition = partition_particles(n, cfg.partition, streams.partition);

  ParticleCloud<Scalar> next(Matrix<Scalar>(cloud.dim(), n), cloud.weights, cloud.time_index + 1);
  propagate_class_a(images, partition.class_a, model, streams.class_a, next.states);

  StepMetrics<Scalar> metrics;
  metrics.class_a = partition.class_a.size();
  metrics.class_b = partition.class_b.size();

  Vector<Scalar> log_transition = Vector<Scalar>::Zero(n);
  Vector<Scalar> log_proposal = Vector<Scalar>::Zero(n);
  if (!partition.class_b.empty()) {
    const auto [mean, cov] = predictive_moments(images, cloud.weights, model);
    const XnesResult<Scalar> fit = fit_proposal(mean, cov, observation, model, cfg.xnes, streams.xnes);
    metrics.likelihood_evals += fit.eval_count;

    const Matrix<Scalar> drawn =
        sample_class_b(static_cast<Index>(partition.class_b.size()), fit.distribution, streams.class_b);
    for (std::size_t k = 0; k < partition.class_b.size(); ++k) {
      next.states.col(partition.class_b[k]) = drawn.col(static_cast<Index>(k));
    }

    const MixtureWeights alpha = mixture_weights(partition, cfg);
    const GaussianDensity<Scalar> q_xnes(fit.distribution);
    for (Index i = 0; i < n; ++i) {
      const auto x = next.states.col(i);
      log_transition(i) = model.transition_log_density_about(Vector<Scalar>(x), Vector<Scalar>(images.col(i)));
      log_proposal(i) = log_mixture(q_xnes(x), log_transition(i), alpha.class_a, alpha.class_b);
    }
  }

  next = update_weights(std::move(next), observation, log_transition, log_proposal, model);
  metrics.likelihood_evals += static_cast<std::size_t>(n);
  return detail::finish_step(std::move(next), std::move(metrics), cfg, streams.resample);
}

enum class FilterKind { kBootstrap, kXnpf };

inline std::string_view to_string(FilterKind kind) { return kind == FilterKind::kBootstrap ? "bpf" : "xnpf"; }

inline FilterKind parse_filter_kind(std::string_view name) {
  if (name == "bpf") {
    return FilterKind::kBootstrap;
  }
  if (name == "xnpf") {
    return FilterKind::kXnpf;
  }
  throw ConfigError("unknown filter '" + std::string(name) + "'");
}

template <StateSpaceModel Model>
StepResult<typename Model::Scalar> filter_step(FilterKind kind, const ParticleCloud<typename Model::Scalar>& cloud,
                                               const Vector<typename Model::Scalar>& observation, const Model& model,
                                               const XnpfConfig& cfg, FilterStreams& streams) {
  return kind == FilterKind::kBootstrap ? bootstrap_step(cloud, observation, model, cfg, streams)
                                        : xnpf_step(cloud, observation, model, cfg, streams);
}

}  // namespace xnpf

#endif
