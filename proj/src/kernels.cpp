#include "bdagar/kernels.hpp"

#include "bdagar/errors.hpp"
#include "bdagar/sparse_chol.hpp"
#include "bdagar/stats.hpp"

#include <cmath>

namespace bdagar {

namespace {

void loglik_row(const PosteriorDraws& draws, const Dataset& data, Eigen::Index s,
                Eigen::MatrixXd& out) {
  const DrawsLayout& lay = draws.layout;
  const int k = lay.k;
  const Eigen::RowVectorXd row = draws.values.row(s);
  for (int i = 0; i < 2; ++i) {
    const Eigen::VectorXd beta =
        row.segment(i == 0 ? lay.beta1() : lay.beta2(), i == 0 ? lay.p1 : lay.p2).transpose();
    const double sigma2 = row(lay.sigma2() + i);
    const Eigen::VectorXd mean =
        data.x[i] * beta + row.segment(i == 0 ? lay.w1() : lay.w2(), k).transpose();
    for (int j = 0; j < k; ++j) out(s, i * k + j) = log_normal_pdf(data.y(j, i), mean(j), sigma2);
  }
}

void check_loglik_shapes(const PosteriorDraws& draws, const Dataset& data) {
  if (data.k() != draws.layout.k || data.p(0) != draws.layout.p1 || data.p(1) != draws.layout.p2)
    throw ValidationError("draws and dataset disagree on dimensions");
}

BdagarSpec spec_of_row(const PosteriorDraws& draws, Eigen::Index s, PrecisionKind kind) {
  const DrawsLayout& lay = draws.layout;
  BdagarSpec spec;
  spec.kind = kind;
  spec.rho1 = draws.values(s, lay.rho());
  spec.rho2 = draws.values(s, lay.rho() + 1);
  spec.tau1 = draws.values(s, lay.tau());
  spec.tau2 = draws.values(s, lay.tau() + 1);
  spec.link = LinkingParams{draws.values(s, lay.eta()), draws.values(s, lay.eta() + 1)};
  return spec;
}

}  // namespace

Eigen::MatrixXd pointwise_log_lik_matrix(const PosteriorDraws& draws, const Dataset& data) {
  check_loglik_shapes(draws, data);
  const Eigen::Index s_total = draws.values.rows();
  Eigen::MatrixXd out(s_total, 2 * draws.layout.k);
#pragma omp parallel for schedule(static)
  for (Eigen::Index s = 0; s < s_total; ++s) loglik_row(draws, data, s, out);
  return out;
}

Eigen::MatrixXd pointwise_log_lik_matrix_serial(const PosteriorDraws& draws, const Dataset& data) {
  check_loglik_shapes(draws, data);
  const Eigen::Index s_total = draws.values.rows();
  Eigen::MatrixXd out(s_total, 2 * draws.layout.k);
  for (Eigen::Index s = 0; s < s_total; ++s) loglik_row(draws, data, s, out);
  return out;
}

Eigen::MatrixXd correlation_draw_matrix(const PosteriorDraws& draws, const RegionGraph& graph,
                                        PrecisionKind kind) {
  if (graph.size() != draws.layout.k) throw ValidationError("draws and graph disagree on k");
  const Eigen::Index s_total = draws.values.rows();
  Eigen::MatrixXd out(s_total, graph.size());
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index s = 0; s < s_total; ++s)
    out.row(s) = cross_correlation_map(spec_of_row(draws, s, kind), graph).transpose();
  return out;
}

Eigen::MatrixXd correlation_draw_matrix_serial(const PosteriorDraws& draws,
                                               const RegionGraph& graph, PrecisionKind kind) {
  if (graph.size() != draws.layout.k) throw ValidationError("draws and graph disagree on k");
  const Eigen::Index s_total = draws.values.rows();
  Eigen::MatrixXd out(s_total, graph.size());
  for (Eigen::Index s = 0; s < s_total; ++s)
    out.row(s) = cross_correlation_map(spec_of_row(draws, s, kind), graph).transpose();
  return out;
}

Eigen::MatrixXd sample_joint_batch(const BdagarSpec& spec, const RegionGraph& graph, int n,
                                   std::uint64_t seed) {
  const JointGaussian joint = joint_precision(spec, graph);
  const SparseCholesky chol(joint.qw);
  Eigen::MatrixXd out(n, 2 * graph.size());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    RngStream stream = RngStream::derived(seed, static_cast<std::uint64_t>(i));
    out.row(i) = chol.sample_precision(stream).transpose();
  }
  return out;
}

Eigen::MatrixXd sample_joint_batch_serial(const BdagarSpec& spec, const RegionGraph& graph, int n,
                                          std::uint64_t seed) {
  const JointGaussian joint = joint_precision(spec, graph);
  const SparseCholesky chol(joint.qw);
  Eigen::MatrixXd out(n, 2 * graph.size());
  for (int i = 0; i < n; ++i) {
    RngStream stream = RngStream::derived(seed, static_cast<std::uint64_t>(i));
    out.row(i) = chol.sample_precision(stream).transpose();
  }
  return out;
}

}  // namespace bdagar
