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

#ifndef XNPF_RESAMPLING_HPP
#define XNPF_RESAMPLING_HPP

#include <xnpf/core.hpp>

#include <string>
#include <string_view>
#include <vector>

/**
 * \file
 * \brief Stochastic universal sampling and multinomial (roulette wheel) resampling.
 *
 * A pointer p selects the smallest index i whose left-to-right cumulative weight is strictly
 * greater than p. A pointer that lands exactly on a cumulative boundary therefore goes to the
 * later particle, and zero-weight particles are never selected.
 */

namespace xnpf {

enum class ResampleScheme { kSus, kMultinomial };

inline std::string_view to_string(ResampleScheme scheme) {
  return scheme == ResampleScheme::kSus ? "sus" : "multinomial";
}

inline ResampleScheme parse_resample_scheme(std::string_view name) {
  if (name == "sus") {
    return ResampleScheme::kSus;
  }
  if (name == "multinomial") {
    return ResampleScheme::kMultinomial;
  }
  throw ConfigError("unknown resampling scheme '" + std::string(name) + "'");
}

namespace detail {

template <class Derived>
Vector<typename Derived::Scalar> cumulative(const Eigen::MatrixBase<Derived>& weights) {
  Vector<typename Derived::Scalar> cum(weights.size());
  typename Derived::Scalar running = 0;
  for (Index i = 0; i < weights.size(); ++i) {
    running += weights(i);
    cum(i) = running;
  }
  return cum;
}

template <class Derived>
Index last_positive(const Eigen::MatrixBase<Derived>& weights) {
  for (Index i = weights.size() - 1; i > 0; --i) {
    if (weights(i) > 0) {
      return i;
    }
  }
  return 0;
}

template <class Derived>
void require_normalized(const Eigen::MatrixBase<Derived>& weights) {
  if (!is_normalized(weights)) {
    throw WeightsNotNormalized();
  }
}

}  // namespace detail

/// SUS selection of `count` particles for a given first pointer `u` in [0, 1/count): pointers
/// u + k/count, k = 0..count-1. `count` defaults to the number of weights.
template <class Derived>
std::vector<Index> sus_indices(const Eigen::MatrixBase<Derived>& weights, double u, Index count = -1) {
  detail::require_normalized(weights);
  const Index n = weights.size();
  const Index m = count < 0 ? n : count;
  const auto cum = detail::cumulative(weights);
  const Index fallback = detail::last_positive(weights);
  std::vector<Index> indices(static_cast<std::size_t>(m));
  Index i = 0;
  for (Index k = 0; k < m; ++k) {
    const double pointer = u + static_cast<double>(k) / static_cast<double>(m);
    while (i < n && !(cum(i) > pointer)) {
      ++i;
    }
    // Rounding can leave the total slightly below the last pointer.
    indices[static_cast<std::size_t>(k)] = i < n ? i : fallback;
  }
  return indices;
}

/// One uniform draw from `rng`.
template <class Derived>
std::vector<Index> sus_indices(const Eigen::MatrixBase<Derived>& weights, Stream& rng) {
  detail::require_normalized(weights);
  const double u = rng.uniform() / static_cast<double>(weights.size());
  return sus_indices(weights, u);
}

/// N independent draws, consumed in output order.
template <class Derived>
std::vector<Index> multinomial_indices(const Eigen::MatrixBase<Derived>& weights, Stream& rng) {
  detail::require_normalized(weights);
  const Index n = weights.size();
  const auto cum = detail::cumulative(weights);
  const Index fallback = detail::last_positive(weights);
  std::vector<Index> indices(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    const double p = rng.uniform();
    const auto* first = cum.data();
    const auto* hit = std::upper_bound(first, first + n, p);
    indices[static_cast<std::size_t>(k)] = hit == first + n ? fallback : static_cast<Index>(hit - first);
  }
  return indices;
}

/// Equally weighted cloud made of copies of the selected particles.
template <class Scalar>
ParticleCloud<Scalar> gather(const ParticleCloud<Scalar>& cloud, const std::vector<Index>& indices) {
  const auto n = static_cast<Index>(indices.size());
  ParticleCloud<Scalar> out(Matrix<Scalar>(cloud.dim(), n), Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n)),
                            cloud.time_index);
  for (Index k = 0; k < n; ++k) {
    out.states.col(k) = cloud.states.col(indices[static_cast<std::size_t>(k)]);
  }
  return out;
}

template <class Scalar>
ParticleCloud<Scalar> sus_resample(const ParticleCloud<Scalar>& cloud, Stream& rng) {
  return gather(cloud, sus_indices(cloud.weights, rng));
}

template <class Scalar>
ParticleCloud<Scalar> multinomial_resample(const ParticleCloud<Scalar>& cloud, Stream& rng) {
  return gather(cloud, multinomial_indices(cloud.weights, rng));
}

template <class Scalar>
ParticleCloud<Scalar> resample(const ParticleCloud<Scalar>& cloud, ResampleScheme scheme, Stream& rng) {
  return scheme == ResampleScheme::kSus ? sus_resample(cloud, rng) : multinomial_resample(cloud, rng);
}

/// Number of times each of `n` particles was selected.
inline std::vector<std::size_t> copy_counts(const std::vector<Index>& indices, Index n) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(n), 0);
  for (Index i : indices) {
    ++counts[static_cast<std::size_t>(i)];
  }
  return counts;
}

}  // namespace xnpf

#endif
