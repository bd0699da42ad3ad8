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

#ifndef XNPF_RANDOM_HPP
#define XNPF_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

/**
 * \file
 * \brief Seeded random streams with platform-independent variate generation.
 *
 * The standard distributions in <random> are implementation-defined, so uniform and normal
 * variates are generated here directly from the raw 64-bit engine output. Seeded runs are
 * therefore bit-reproducible across standard library implementations.
 */

namespace xnpf {

/// SplitMix64 finalizer, used to decorrelate derived seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// FNV-1a hash of a stream name.
constexpr std::uint64_t stream_tag(std::string_view name) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Seed of the substream `name` derived from `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view name) noexcept {
  return splitmix64(splitmix64(master) ^ stream_tag(name));
}

/// A seeded random stream.
class Stream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Stream(std::uint64_t seed = 0) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform variate in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Rejection sampling, so no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) {
      x = engine_();
    }
    return x % n;
  }

  /// Standard normal variate (Marsaglia polar method; the second variate is cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Independent named substreams consumed by one filter run.
struct FilterStreams {
  Stream partition;
  Stream class_a;
  Stream xnes;
  Stream class_b;
  Stream resample;
  Stream init;

  explicit FilterStreams(std::uint64_t master)
      : partition(derive_seed(master, "partition")),
        class_a(derive_seed(master, "class-a")),
        xnes(derive_seed(master, "xnes")),
        class_b(derive_seed(master, "class-b")),
        resample(derive_seed(master, "resample")),
        init(derive_seed(master, "init")) {}
};

}  // namespace xnpf

#endif
