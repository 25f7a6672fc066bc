#pragma once

#include "bdagar/dagar.hpp"
#include "bdagar/region_graph.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace bdagar {

// Endemic linking parameters of A21 = eta0 I + eta1 M.
struct LinkingParams {
  double eta0 = 0.0;
  double eta1 = 0.0;
};

// Full bivariate model parameters over one shared graph. Disease 1 carries
// the marginal field, disease 2 is conditional on it with mean A21 w1.
struct BdagarSpec {
  PrecisionKind kind = PrecisionKind::dagar;
  double rho1 = 0.0;
  double rho2 = 0.0;
  double tau1 = 1.0;
  double tau2 = 1.0;
  LinkingParams link;

  void validate() const;
};

Eigen::SparseMatrix<double> linking_matrix(const LinkingParams& link, const RegionGraph& graph);

// Joint 2k x 2k precision of w = (w1, w2):
//   [ tau1 Q1 + tau2 A21^T Q2 A21   -tau2 A21^T Q2 ]
//   [       -tau2 Q2 A21                 tau2 Q2   ]
// with logdet = k log tau1 + logdet Q1 + k log tau2 + logdet Q2.
struct JointGaussian {
  Eigen::SparseMatrix<double> qw;
  double logdet = 0.0;
  int k = 0;
};

JointGaussian joint_precision(const BdagarSpec& spec, const RegionGraph& graph);

// The four k x k blocks of Qw^{-1}:
//   c11 = Q1^{-1}/tau1                 c12 = Q1^{-1} A21^T / tau1
//   c21 = c12^T                        c22 = A21 Q1^{-1} A21^T / tau1 + Q2^{-1}/tau2
struct CovarianceBlocks {
  Eigen::MatrixXd c11, c12, c21, c22;
};

CovarianceBlocks joint_covariance(const BdagarSpec& spec, const RegionGraph& graph);

// Per-region correlation between the two diseases' effects:
// c12[j,j] / sqrt(c11[j,j] c22[j,j]).
Eigen::VectorXd cross_correlation_map(const BdagarSpec& spec, const RegionGraph& graph);

}  // namespace bdagar
