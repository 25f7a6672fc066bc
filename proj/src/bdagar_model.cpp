#include "bdagar/bdagar_model.hpp"

#include "bdagar/errors.hpp"
#include "bdagar/sparse_chol.hpp"

#include <cmath>

namespace bdagar {

void BdagarSpec::validate() const {
  check_rho_domain(rho1);
  check_rho_domain(rho2);
  if (!(tau1 > 0.0) || !(tau2 > 0.0)) throw ValidationError("tau parameters must be positive");
  if (!std::isfinite(link.eta0) || !std::isfinite(link.eta1))
    throw ValidationError("eta parameters must be finite");
}

Eigen::SparseMatrix<double> linking_matrix(const LinkingParams& link, const RegionGraph& graph) {
  const int k = graph.size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(k + 2 * graph.edges().size());
  for (int i = 0; i < k; ++i) trips.emplace_back(i, i, link.eta0);
  for (auto [a, b] : graph.edges()) {
    trips.emplace_back(a, b, link.eta1);
    trips.emplace_back(b, a, link.eta1);
  }
  Eigen::SparseMatrix<double> a21(k, k);
  a21.setFromTriplets(trips.begin(), trips.end());
  return a21;
}

JointGaussian joint_precision(const BdagarSpec& spec, const RegionGraph& graph) {
  spec.validate();
  const int k = graph.size();
  const PrecisionModel model(graph, spec.kind);
  const SpatialPrecision q1 = model.build(spec.rho1);
  const SpatialPrecision q2 = model.build(spec.rho2);
  const Eigen::SparseMatrix<double> a21 = linking_matrix(spec.link, graph);

  const Eigen::SparseMatrix<double> q2a = (q2.q * a21).pruned();
  const Eigen::SparseMatrix<double> atq2a = (a21.transpose() * q2a).pruned();

  std::vector<Eigen::Triplet<double>> trips;
  auto add_block = [&](const Eigen::SparseMatrix<double>& m, int roff, int coff, double scale) {
    for (int col = 0; col < m.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it)
        trips.emplace_back(int(it.row()) + roff, int(it.col()) + coff, scale * it.value());
  };
  add_block(q1.q, 0, 0, spec.tau1);
  add_block(atq2a, 0, 0, spec.tau2);
  add_block(q2a, k, 0, -spec.tau2);
  Eigen::SparseMatrix<double> aq2 = q2a.transpose();
  add_block(aq2, 0, k, -spec.tau2);
  add_block(q2.q, k, k, spec.tau2);

  JointGaussian joint;
  joint.k = k;
  joint.qw = Eigen::SparseMatrix<double>(2 * k, 2 * k);
  joint.qw.setFromTriplets(trips.begin(), trips.end());
  joint.logdet =
      k * std::log(spec.tau1) + q1.logdet + k * std::log(spec.tau2) + q2.logdet;
  return joint;
}

CovarianceBlocks joint_covariance(const BdagarSpec& spec, const RegionGraph& graph) {
  spec.validate();
  const int k = graph.size();
  const PrecisionModel model(graph, spec.kind);
  const SpatialPrecision q1 = model.build(spec.rho1);
  const SpatialPrecision q2 = model.build(spec.rho2);
  const Eigen::MatrixXd a21 = Eigen::MatrixXd(linking_matrix(spec.link, graph));

  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(k, k);
  const Eigen::MatrixXd q1inv = SparseCholesky(q1.q).solve(eye);
  const Eigen::MatrixXd q2inv = SparseCholesky(q2.q).solve(eye);

  CovarianceBlocks c;
  c.c11 = q1inv / spec.tau1;
  c.c12 = c.c11 * a21.transpose();
  c.c21 = c.c12.transpose();
  c.c22 = a21 * c.c11 * a21.transpose() + q2inv / spec.tau2;
  return c;
}

Eigen::VectorXd cross_correlation_map(const BdagarSpec& spec, const RegionGraph& graph) {
  const CovarianceBlocks c = joint_covariance(spec, graph);
  const int k = graph.size();
  Eigen::VectorXd corr(k);
  for (int j = 0; j < k; ++j)
    corr(j) = c.c12(j, j) / std::sqrt(c.c11(j, j) * c.c22(j, j));
  return corr;
}

}  // namespace bdagar
