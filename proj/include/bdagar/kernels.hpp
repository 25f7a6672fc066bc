#pragma once

#include "bdagar/bdagar_model.hpp"
#include "bdagar/inference.hpp"
#include "bdagar/region_graph.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace bdagar {

// Draw-wise kernels, parallelized over retained draws with OpenMP. Each has
// a _serial twin producing bitwise-identical output: rows are computed
// independently (per-draw derived RNG streams where randomness is involved)
// so the schedule cannot change results.

// S x 2k log predictive densities log N(y_ij | x_ij beta_i + w_ij, sigma_i^2).
Eigen::MatrixXd pointwise_log_lik_matrix(const PosteriorDraws& draws, const Dataset& data);
Eigen::MatrixXd pointwise_log_lik_matrix_serial(const PosteriorDraws& draws, const Dataset& data);

// S x k per-draw cross-disease correlations c12[jj]/sqrt(c11[jj] c22[jj]).
Eigen::MatrixXd correlation_draw_matrix(const PosteriorDraws& draws, const RegionGraph& graph,
                                        PrecisionKind kind);
Eigen::MatrixXd correlation_draw_matrix_serial(const PosteriorDraws& draws,
                                               const RegionGraph& graph, PrecisionKind kind);

// n x 2k draws from N(0, Qw^{-1}) off one shared factorization; draw i uses
// the stream derived from (seed, i).
Eigen::MatrixXd sample_joint_batch(const BdagarSpec& spec, const RegionGraph& graph, int n,
                                   std::uint64_t seed);
Eigen::MatrixXd sample_joint_batch_serial(const BdagarSpec& spec, const RegionGraph& graph, int n,
                                          std::uint64_t seed);

}  // namespace bdagar
