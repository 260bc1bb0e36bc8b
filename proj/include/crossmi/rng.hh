// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace crossmi {

// splitmix64 finalizer; used to spread seeds before feeding the engine.
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic random stream with cheap derivation of independent child
// streams. A child is keyed off the parent's seed, not its draw position,
// so fanning out over ensemble members or Monte Carlo sample indices gives
// the same sequences whether the work runs serially or in parallel.
//
// All variate transforms are written out here rather than taken from
// <random> distributions, whose algorithms are implementation-defined;
// raw std::mt19937_64 output is fully specified by the standard.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  uint64_t seed() const { return seed_; }

  RandomStream child(uint64_t index) const {
    return RandomStream(mix64(seed_ ^ mix64(index + 0x517cc1b727220a95ULL)));
  }

  uint64_t next_u64() { return engine_(); }

  // Uniform on (0, 1]; never returns 0 so log(u) is always finite.
  double uniform() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // One uint64 in [0, n) by rejection on the top bits.
  uint64_t uniform_index(uint64_t n) {
    assert(n > 0);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // Box-Muller, cosine branch only (no cached second variate, to keep the
  // consumed sequence independent of call history).
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Marsaglia-Tsang; shape < 1 handled with the boost trick.
  double gamma(double shape) {
    assert(shape > 0);
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
        return d * v;
      }
    }
  }

  double gamma(double shape, double rate) { return gamma(shape) / rate; }

  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

  double student_t(double dof) {
    return normal() / std::sqrt(chi_square(dof) / dof);
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  // Index draw from an unnormalized non-negative weight vector.
  size_t categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    assert(total > 0);
    double u = uniform() * total;
    for (size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u <= 0.0) return i;
    }
    return weights.size() - 1;
  }

  // Index draw from log weights, max-shifted before exponentiation.
  size_t categorical_log(const std::vector<double>& log_weights) {
    assert(!log_weights.empty());
    double max_lw = log_weights[0];
    for (double lw : log_weights) max_lw = std::max(max_lw, lw);
    std::vector<double> w(log_weights.size());
    for (size_t i = 0; i < log_weights.size(); ++i) {
      w[i] = std::exp(log_weights[i] - max_lw);
    }
    return categorical(w);
  }

  std::vector<double> dirichlet(const std::vector<double>& alphas) {
    std::vector<double> out(alphas.size());
    double total = 0.0;
    for (size_t i = 0; i < alphas.size(); ++i) {
      out[i] = gamma(alphas[i]);
      total += out[i];
    }
    for (double& x : out) x /= total;
    return out;
  }

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace crossmi
