#pragma once

#include "bdagar/region_graph.hpp"
#include "bdagar/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>

namespace bdagar {

enum class PrecisionKind { dagar, car };

PrecisionKind precision_kind_from_string(const std::string& s);
std::string to_string(PrecisionKind kind);

// The (B, F) pair behind a DAGAR precision at a fixed rho:
//   b_ij = rho / (1 + (n_<i - 1) rho^2)   for j in N(i),
//   f_ii = (1 + (n_<i - 1) rho^2) / (1 - rho^2),  with n_<1 = 0 so f_11 = 1.
// B is stored by rows: every entry of row i shares the value row_b[i].
struct DagarComponents {
  double rho = 0.0;
  NeighborSets sets;
  Eigen::VectorXd row_b;  // b_ij for j in N(i); 0 where N(i) is empty
  Eigen::VectorXd f;      // diagonal of F, all positive

  Eigen::SparseMatrix<double> b_matrix() const;  // strictly lower triangular B
};

// Sparse symmetric positive-definite precision with its log-determinant.
struct SpatialPrecision {
  Eigen::SparseMatrix<double> q;
  double logdet = 0.0;
  PrecisionKind kind = PrecisionKind::dagar;
};

DagarComponents build_BF(const RegionGraph& graph, double rho);

// Q(rho) = (I - B)^T F (I - B); logdet = sum log f_ii since det(I - B) = 1.
SpatialPrecision dagar_precision(const RegionGraph& graph, double rho);

// Proper-CAR comparator Q = D - rho M with D = diag(degrees); logdet from a
// sparse Cholesky. Rejects isolated vertices (singular row at rho = 0).
SpatialPrecision car_precision(const RegionGraph& graph, double rho);

struct GmrfScale {
  double tau;
  explicit GmrfScale(double t);
};

// log N(w | mean, tau * Q) with Q a precision matrix:
//   -(k/2) log 2pi + (k/2) log tau + logdet(Q)/2 - (tau/2)(w-mean)^T Q (w-mean)
double gmrf_log_density(const Eigen::VectorXd& w, GmrfScale scale, const SpatialPrecision& prec,
                        const Eigen::VectorXd& mean);

// Draw w = mean + L^{-T} z / sqrt(tau) where L L^T factors Q.
Eigen::VectorXd sample_gmrf(GmrfScale scale, const SpatialPrecision& prec,
                            const Eigen::VectorXd& mean, RngStream& rng);

// Matrix-Market coordinate text for external verification of Q.
std::string to_matrix_market(const Eigen::SparseMatrix<double>& m);

// Per-graph evaluator bound to one precision family. Gives the Metropolis
// loop cheap log-determinants and quadratic forms at arbitrary rho without
// assembling Q: the DAGAR logdet is the closed form sum log f_ii, the CAR
// logdet uses the precomputed spectrum of D^{-1/2} M D^{-1/2}.
class PrecisionModel {
public:
  PrecisionModel(const RegionGraph& graph, PrecisionKind kind);

  SpatialPrecision build(double rho) const;
  double log_det(double rho) const;
  // v^T Q(rho) v
  double quad_form(double rho, const Eigen::VectorXd& v) const;

  PrecisionKind kind() const { return kind_; }
  int size() const { return k_; }

private:
  PrecisionKind kind_;
  int k_;
  NeighborSets sets_;                       // dagar
  std::vector<std::pair<int, int>> edges_;  // car quadratic form and assembly
  Eigen::VectorXd degrees_;                 // car
  Eigen::VectorXd car_spectrum_;            // eigenvalues of D^{-1/2} M D^{-1/2}
};

void check_rho_domain(double rho);

}  // namespace bdagar
