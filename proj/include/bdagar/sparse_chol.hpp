#pragma once

#include "bdagar/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <stdexcept>

namespace bdagar {

// Sparse LDL^T factorization of a symmetric positive-definite matrix.
// Wraps Eigen's SimplicialLDLT so the fill-reducing permutation is handled
// in one place for solves, log-determinants and precision-matrix sampling.
class SparseCholesky {
public:
  explicit SparseCholesky(const Eigen::SparseMatrix<double>& a) {
    ldlt_.compute(a);
    if (ldlt_.info() != Eigen::Success || (ldlt_.vectorD().array() <= 0.0).any())
      throw std::runtime_error("sparse Cholesky failed: matrix is not positive definite");
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return ldlt_.solve(b); }

  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const { return ldlt_.solve(b); }

  double log_det() const { return ldlt_.vectorD().array().log().sum(); }

  // Zero-mean draw with covariance A^{-1}. With P A P^T = L D L^T this is
  // x = P^T L^{-T} D^{-1/2} z.
  Eigen::VectorXd sample_precision(RngStream& rng) const {
    Eigen::VectorXd z = rng.normal_vector(ldlt_.rows());
    z.array() /= ldlt_.vectorD().array().sqrt();
    Eigen::VectorXd u = ldlt_.matrixU().solve(z);
    return ldlt_.permutationPinv() * u;
  }

  Eigen::Index rows() const { return ldlt_.rows(); }

private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

}  // namespace bdagar
