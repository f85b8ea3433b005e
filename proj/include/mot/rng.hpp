#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mot {

/// Deterministic random source built on std::mt19937_64 with hand-rolled
/// samplers. The engine's output sequence is fixed by the standard and the
/// samplers below avoid std::*_distribution, whose streams differ between
/// standard library implementations, so a seed reproduces the same scenario
/// everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(uniform01() * (hi - lo + 1));
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller (two engine draws per sample, no cache).
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape > 0.
  double gamma(double shape) {
    if (shape < 1.0) {
      double u = uniform01();
      while (u <= 0.0) u = uniform01();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      double u = uniform01();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  /// Student-t with dof degrees of freedom (dof > 2 for finite variance).
  double student_t(double dof) {
    double z = normal();
    double chi2 = 2.0 * gamma(dof / 2.0);
    return z / std::sqrt(chi2 / dof);
  }

  /// Poisson by inversion (products of uniforms); fine for small rates.
  int poisson(double rate) {
    if (rate <= 0.0) return 0;
    const double limit = std::exp(-rate);
    double prod = uniform01();
    int count = 0;
    while (prod > limit) {
      prod *= uniform01();
      ++count;
    }
    return count;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mot
