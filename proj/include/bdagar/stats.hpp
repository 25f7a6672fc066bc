#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bdagar {

inline constexpr double kLog2Pi = 1.8378770664093454836;

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double inv_logit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// log N(x | mean, variance)
inline double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

// log Gamma(x | shape, rate), density proportional to x^{shape-1} e^{-rate x}
inline double log_gamma_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

// log IG(x | shape, rate), density proportional to x^{-shape-1} e^{-rate/x}
inline double log_inv_gamma_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

// log(sum exp(v_i)) without overflow
inline double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

inline double mean_of(const Eigen::VectorXd& v) { return v.mean(); }

// Sample variance with divisor n-1 (0 for a single value).
inline double sample_variance(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  if (n < 2) return 0.0;
  const double m = v.mean();
  return (v.array() - m).square().sum() / double(n - 1);
}

// Linear-interpolation quantile (R type 7): h = (n-1)p, interpolate
// between order statistics floor(h) and floor(h)+1.
inline double quantile_type7(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double h = double(v.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - double(lo)) * (v[lo + 1] - v[lo]);
}

inline double quantile_type7(const Eigen::VectorXd& v, double p) {
  return quantile_type7(std::vector<double>(v.data(), v.data() + v.size()), p);
}

}  // namespace bdagar
