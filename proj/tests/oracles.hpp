#pragma once

// Independent dense re-implementations used to check the library's sparse
// and closed-form paths. Everything here is brute force on purpose.

#include "bdagar/region_graph.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace oracle {

inline Eigen::MatrixXd dense(const Eigen::SparseMatrix<double>& m) {
  return Eigen::MatrixXd(m);
}

inline double logdet_dense(const Eigen::MatrixXd& a) {
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// (I-B)^T F (I-B) assembled densely, with B and F filled entry by entry
// from the definition.
inline Eigen::MatrixXd dagar_dense(const bdagar::RegionGraph& graph, double rho) {
  const int k = graph.size();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, k);
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    int n = 0;
    for (int j : graph.neighbors()[i])
      if (j < i) ++n;
    const double denom = 1.0 + (n - 1.0) * rho * rho;
    f(i, i) = denom / (1.0 - rho * rho);
    for (int j : graph.neighbors()[i])
      if (j < i) b(i, j) = rho / denom;
  }
  const Eigen::MatrixXd imb = Eigen::MatrixXd::Identity(k, k) - b;
  return imb.transpose() * f * imb;
}

inline Eigen::MatrixXd car_dense(const bdagar::RegionGraph& graph, double rho) {
  const int k = graph.size();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) q(i, i) = double(graph.neighbors()[i].size());
  for (auto [a, b] : graph.edges()) {
    q(a, b) = -rho;
    q(b, a) = -rho;
  }
  return q;
}

// log N(x | mean, precision) evaluated densely.
inline double mvn_logpdf_prec(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                              const Eigen::MatrixXd& prec) {
  const int k = static_cast<int>(x.size());
  const Eigen::VectorXd d = x - mean;
  return -0.5 * k * std::log(2.0 * M_PI) + 0.5 * logdet_dense(prec) - 0.5 * d.dot(prec * d);
}

// Monte Carlo standard error of an empirical covariance entry between
// jointly normal coordinates with covariance c.
inline double cov_mc_se(double cii, double cjj, double cij, int n) {
  return std::sqrt((cii * cjj + cij * cij) / double(n));
}

}  // namespace oracle
