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

#ifndef XNPF_XNES_HPP
#define XNPF_XNES_HPP

#include <xnpf/core.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

/**
 * \file
 * \brief Exponential natural evolution strategies (xNES).
 *
 * The search distribution N(m, sigma^2 B B^T) is kept in the factored form (m, sigma, B) with
 * det(B) = 1. Each iteration samples lambda points, ranks them by fitness, and moves the three
 * factors along the natural gradient expressed in local coordinates; the shape update is a
 * matrix exponential of a traceless symmetric matrix, so det(B) is preserved.
 */

namespace xnpf {

/// Gaussian search distribution with full covariance sigma^2 * B * B^T.
template <class Scalar = double>
struct SearchDistribution {
  Vector<Scalar> mean;
  Scalar sigma = Scalar(1);
  Matrix<Scalar> shape;

  SearchDistribution() = default;
  SearchDistribution(Vector<Scalar> m, Scalar s, Matrix<Scalar> b) : mean(std::move(m)), sigma(s), shape(std::move(b)) {}

  /// Isotropic distribution N(m, s^2 I).
  static SearchDistribution isotropic(Vector<Scalar> m, Scalar s) {
    const Index d = m.size();
    return SearchDistribution(std::move(m), s, Matrix<Scalar>::Identity(d, d));
  }

  /// Factors an SPD covariance: sigma = det(cov)^(1/(2d)), B = cov^(1/2) / sigma.
  static SearchDistribution from_covariance(Vector<Scalar> m, const Matrix<Scalar>& cov) {
    const Index d = m.size();
    Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(cov);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > Scalar(0))) {
      throw NumericalFailure("covariance is not positive definite");
    }
    const Scalar log_det = eig.eigenvalues().array().log().sum();
    const Scalar s = std::exp(log_det / Scalar(2 * d));
    Matrix<Scalar> root = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
    return SearchDistribution(std::move(m), s, root / s);
  }

  [[nodiscard]] Index dim() const { return mean.size(); }

  /// Normalized covariance C = B B^T.
  [[nodiscard]] Matrix<Scalar> shape_covariance() const { return shape * shape.transpose(); }

  /// Full covariance sigma^2 B B^T.
  [[nodiscard]] Matrix<Scalar> covariance() const { return sigma * sigma * shape_covariance(); }
};

/// xNES hyper-parameters. Non-positive population or learning rates select the canonical defaults.
struct XnesConfig {
  Index population = 0;
  int iterations = 5;
  double eta_mean = 1.0;
  double eta_sigma = 0.0;
  double eta_shape = 0.0;

  static Index default_population(Index dim) {
    return 4 + static_cast<Index>(std::floor(3.0 * std::log(static_cast<double>(dim))));
  }

  static double default_learning_rate(Index dim) {
    const auto d = static_cast<double>(dim);
    return (9.0 + 3.0 * std::log(d)) / (5.0 * d * std::sqrt(d));
  }

  /// Copy with every defaulted field filled in for dimension `dim`.
  [[nodiscard]] XnesConfig resolved(Index dim) const {
    XnesConfig out = *this;
    if (out.population <= 0) {
      out.population = default_population(dim);
    }
    if (out.eta_sigma <= 0.0) {
      out.eta_sigma = default_learning_rate(dim);
    }
    if (out.eta_shape <= 0.0) {
      out.eta_shape = default_learning_rate(dim);
    }
    return out;
  }

  friend bool operator==(const XnesConfig&, const XnesConfig&) = default;
};

/// Rank-based utility weights in rank order (best first); they sum to zero.
inline Vector<double> utility_weights(Index lambda) {
  const auto n = static_cast<double>(lambda);
  Vector<double> raw(lambda);
  for (Index k = 0; k < lambda; ++k) {
    raw(k) = std::max(0.0, std::log(n / 2.0 + 1.0) - std::log(static_cast<double>(k + 1)));
  }
  return (raw / raw.sum()).array() - 1.0 / n;
}

/// Utility of every sample, indexed like `fitnesses`. Higher fitness ranks first; ties keep index order.
/// NaN fitnesses rank last.
template <class Derived>
Vector<double> rank_utilities(const Eigen::MatrixBase<Derived>& fitnesses) {
  const Index lambda = fitnesses.size();
  if (lambda < 2) {
    throw Error("rank_utilities requires at least two samples");
  }
  std::vector<Index> order(static_cast<std::size_t>(lambda));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double fa = fitnesses(a);
    const double fb = fitnesses(b);
    if (std::isnan(fb)) {
      return !std::isnan(fa);
    }
    return fa > fb;
  });
  const Vector<double> by_rank = utility_weights(lambda);
  Vector<double> utilities(lambda);
  for (Index rank = 0; rank < lambda; ++rank) {
    utilities(order[static_cast<std::size_t>(rank)]) = by_rank(rank);
  }
  return utilities;
}

/// Local coordinates s_k ~ N(0, I) and their images z_k = m + sigma B s_k, stored column-wise.
template <class Scalar = double>
struct Population {
  Matrix<Scalar> local;
  Matrix<Scalar> points;

  [[nodiscard]] Index size() const { return points.cols(); }
};

template <class Scalar>
Population<Scalar> sample_population(const SearchDistribution<Scalar>& dist, Index lambda, Stream& rng) {
  const Index d = dist.dim();
  Population<Scalar> pop{Matrix<Scalar>(d, lambda), Matrix<Scalar>(d, lambda)};
  for (Index k = 0; k < lambda; ++k) {
    for (Index j = 0; j < d; ++j) {
      pop.local(j, k) = static_cast<Scalar>(rng.normal());
    }
  }
  pop.points = (dist.sigma * dist.shape * pop.local).colwise() + dist.mean;
  return pop;
}

/// exp(A) for symmetric A via eigendecomposition; eigenvalues are clamped to [-40, 40].
template <class Scalar>
Matrix<Scalar> symmetric_expm(const Matrix<Scalar>& a) {
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(a);
  if (eig.info() != Eigen::Success) {
    throw NumericalFailure("eigendecomposition did not converge");
  }
  const Vector<Scalar> exp_values = eig.eigenvalues().array().max(Scalar(-40)).min(Scalar(40)).exp();
  return eig.eigenvectors() * exp_values.asDiagonal() * eig.eigenvectors().transpose();
}

/// One natural-gradient step of (m, sigma, B) given the utilities of a sampled population.
template <class Scalar>
SearchDistribution<Scalar> natural_gradient_update(const SearchDistribution<Scalar>& dist,
                                                   const Population<Scalar>& pop, const Vector<double>& utilities,
                                                   const XnesConfig& cfg) {
  const Index d = dist.dim();
  if (utilities.size() != pop.size()) {
    throw LengthMismatch(static_cast<std::size_t>(utilities.size()), static_cast<std::size_t>(pop.size()));
  }
  const XnesConfig rates = cfg.resolved(d);
  const Vector<Scalar> u = utilities.cast<Scalar>();
  const Matrix<Scalar> identity = Matrix<Scalar>::Identity(d, d);

  const Vector<Scalar> grad_delta = pop.local * u;
  // sum_k u_k (s_k s_k^T - I); the identity term vanishes when the utilities sum to zero.
  const Matrix<Scalar> grad_m = pop.local * u.asDiagonal() * pop.local.transpose() - u.sum() * identity;
  const Scalar grad_sigma = grad_m.trace() / static_cast<Scalar>(d);
  const Matrix<Scalar> grad_b = grad_m - grad_sigma * identity;

  SearchDistribution<Scalar> next = dist;
  next.mean = dist.mean + static_cast<Scalar>(rates.eta_mean) * dist.sigma * (dist.shape * grad_delta);
  next.sigma = dist.sigma * std::exp(static_cast<Scalar>(rates.eta_sigma) / Scalar(2) * grad_sigma);
  next.shape = dist.shape * symmetric_expm<Scalar>(static_cast<Scalar>(rates.eta_shape) / Scalar(2) * grad_b);
  // exp of a traceless matrix has unit determinant; rescaling removes accumulated rounding drift.
  const Scalar det = next.shape.determinant();
  if (det > Scalar(0) && std::isfinite(det)) {
    next.shape /= std::pow(det, Scalar(1) / static_cast<Scalar>(d));
  }
  return next;
}

template <class Scalar = double>
struct XnesResult {
  SearchDistribution<Scalar> distribution;
  std::size_t eval_count = 0;
};

/// Runs cfg.iterations rounds of sample, rank and update, maximizing `fitness`.
template <class Scalar, class Fitness>
XnesResult<Scalar> run_xnes(Fitness&& fitness, const SearchDistribution<Scalar>& init, const XnesConfig& cfg,
                            Stream& rng) {
  if (cfg.iterations < 1) {
    throw Error("xNES requires at least one iteration");
  }
  const XnesConfig rates = cfg.resolved(init.dim());
  XnesResult<Scalar> result{init, 0};
  Vector<double> values(rates.population);
  for (int it = 0; it < rates.iterations; ++it) {
    const Population<Scalar> pop = sample_population(result.distribution, rates.population, rng);
    for (Index k = 0; k < pop.size(); ++k) {
      values(k) = static_cast<double>(fitness(Vector<Scalar>(pop.points.col(k))));
    }
    result.eval_count += static_cast<std::size_t>(pop.size());
    result.distribution = natural_gradient_update(result.distribution, pop, rank_utilities(values), rates);
  }
  return result;
}

/// Factorization of the shape matrix reused across many density evaluations.
template <class Scalar = double>
class GaussianDensity {
 public:
  explicit GaussianDensity(const SearchDistribution<Scalar>& dist) : dist_(dist), lu_(dist.shape) {
    const Index d = dist.dim();
    Scalar log_det_b = 0;
    for (Index i = 0; i < d; ++i) {
      log_det_b += std::log(std::abs(lu_.matrixLU()(i, i)));
    }
    constant_ = -Scalar(0.5) * static_cast<Scalar>(d) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) -
                static_cast<Scalar>(d) * std::log(dist.sigma) - log_det_b;
  }

  template <class Derived>
  Scalar operator()(const Eigen::MatrixBase<Derived>& x) const {
    const Vector<Scalar> y = lu_.solve(Vector<Scalar>(x - dist_.mean)) / dist_.sigma;
    return constant_ - Scalar(0.5) * y.squaredNorm();
  }

 private:
  SearchDistribution<Scalar> dist_;
  Eigen::PartialPivLU<Matrix<Scalar>> lu_;
  Scalar constant_ = 0;
};

/// log N(x; m, sigma^2 B B^T), evaluated through the factors.
template <class Scalar, class Derived>
Scalar gaussian_log_density(const SearchDistribution<Scalar>& dist, const Eigen::MatrixBase<Derived>& x) {
  return GaussianDensity<Scalar>(dist)(x);
}

}  // namespace xnpf

#endif
