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

#ifndef XNPF_MODELS_LINEAR_GAUSSIAN_HPP
#define XNPF_MODELS_LINEAR_GAUSSIAN_HPP

#include <xnpf/core.hpp>

#include <cmath>
#include <numbers>

namespace xnpf::models {

/// x_t = a * x_{t-1} + q_t,  z_t = x_t + r_t, with independent per-component Gaussian noises.
template <class ScalarT = double>
class LinearGaussian {
 public:
  using Scalar = ScalarT;

  LinearGaussian(Vector<Scalar> gain, Vector<Scalar> process_sd, Vector<Scalar> obs_sd)
      : gain_(std::move(gain)), process_sd_(std::move(process_sd)), obs_sd_(std::move(obs_sd)) {}

  /// Scalar AR(1) model.
  static LinearGaussian scalar(Scalar a, Scalar q, Scalar r) {
    return LinearGaussian(Vector<Scalar>::Constant(1, a), Vector<Scalar>::Constant(1, q), Vector<Scalar>::Constant(1, r));
  }

  [[nodiscard]] Index state_dim() const { return gain_.size(); }
  [[nodiscard]] Index obs_dim() const { return gain_.size(); }

  [[nodiscard]] Vector<Scalar> predict(const Vector<Scalar>& x, std::size_t /*t*/) const {
    return gain_.cwiseProduct(x);
  }

  Vector<Scalar> perturb(const Vector<Scalar>& image, Stream& rng) const {
    Vector<Scalar> out = image;
    for (Index j = 0; j < out.size(); ++j) {
      out(j) += process_sd_(j) * static_cast<Scalar>(rng.normal());
    }
    return out;
  }

  [[nodiscard]] Scalar transition_log_density_about(const Vector<Scalar>& x, const Vector<Scalar>& image) const {
    return diagonal_log_pdf(x - image, process_sd_);
  }

  [[nodiscard]] Scalar observation_log_likelihood(const Vector<Scalar>& z, const Vector<Scalar>& x) const {
    return diagonal_log_pdf(z - x, obs_sd_);
  }

  [[nodiscard]] Vector<Scalar> transition_variance() const { return process_sd_.array().square(); }

  Vector<Scalar> observe(const Vector<Scalar>& x, Stream& rng) const {
    Vector<Scalar> z = x;
    for (Index j = 0; j < z.size(); ++j) {
      z(j) += obs_sd_(j) * static_cast<Scalar>(rng.normal());
    }
    return z;
  }

 private:
  static Scalar diagonal_log_pdf(const Vector<Scalar>& residual, const Vector<Scalar>& sd) {
    const Scalar half_log_two_pi = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
    Scalar total = 0;
    for (Index j = 0; j < residual.size(); ++j) {
      const Scalar r = residual(j) / sd(j);
      total += -half_log_two_pi - std::log(sd(j)) - Scalar(0.5) * r * r;
    }
    return total;
  }

  Vector<Scalar> gain_;
  Vector<Scalar> process_sd_;
  Vector<Scalar> obs_sd_;
};

}  // namespace xnpf::models

#endif
