#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace bdagar {

// Seeded random stream. Nearby raw seeds (seed, seed+1, ...) are scrambled
// through splitmix64 before feeding the engine, so per-chain and per-draw
// streams derived by index stay decorrelated.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed) : eng_(scramble(seed)) {}

  // Derive an independent stream for a sub-task (chain index, draw index).
  static RngStream derived(std::uint64_t seed, std::uint64_t index) {
    return RngStream(scramble(seed) ^ scramble(index + 0x9e3779b97f4a7c15ULL));
  }

  double normal() { return std::normal_distribution<double>{}(eng_); }

  double uniform() { return std::uniform_real_distribution<double>{}(eng_); }

  // Gamma(shape, rate) with density proportional to x^{shape-1} e^{-rate x}.
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>{shape, 1.0 / rate}(eng_);
  }

  // Inverse gamma with density proportional to x^{-shape-1} e^{-rate/x}.
  double inverse_gamma(double shape, double rate) { return 1.0 / gamma(shape, rate); }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal();
    return z;
  }

private:
  static std::uint64_t scramble(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 eng_;
};

}  // namespace bdagar
