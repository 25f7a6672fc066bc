#pragma once

#include "bdagar/bdagar_model.hpp"
#include "bdagar/dagar.hpp"
#include "bdagar/region_graph.hpp"
#include "bdagar/rng.hpp"
#include "bdagar/sparse_chol.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace bdagar {

// Two-disease outcomes and covariates over one region graph. y is k x 2
// (one column per disease); x[i] is k x p_i with a leading all-ones
// intercept column.
struct Dataset {
  RegionGraph graph;
  std::array<std::string, 2> disease_names;
  Eigen::MatrixXd y;
  std::array<Eigen::MatrixXd, 2> x;
  std::array<std::vector<std::string>, 2> coef_names;

  int k() const { return graph.size(); }
  int p(int disease) const { return static_cast<int>(x[disease].cols()); }
  void validate() const;
};

struct PriorSpec {
  double a_tau = 2.0;
  double b_tau = 0.1;
  double a_sigma = 2.0;
  double b_sigma = 1.0;
  double beta_var = 1e3;
  double eta_var = 1e2;
  // rho_i ~ Uniform(0, 1)

  void validate() const;
};

struct McmcConfig {
  int iterations = 10000;
  int burn_in = 5000;
  int thin = 1;
  int n_chains = 1;
  std::uint64_t seed = 42;
  bool adapt = true;
  double init_step = 0.5;  // random-walk sd on logit(rho)

  void validate() const;
  int retained_per_chain() const { return (iterations - burn_in) / thin; }
};

struct ChainState {
  std::array<Eigen::VectorXd, 2> beta;
  Eigen::VectorXd w;  // length 2k, w1 then w2
  std::array<double, 2> sigma2{1.0, 1.0};
  std::array<double, 2> tau{1.0, 1.0};
  std::array<double, 2> rho{0.5, 0.5};
  LinkingParams eta;
  std::array<double, 2> step{0.5, 0.5};

  Eigen::VectorXd w1(int k) const { return w.head(k); }
  Eigen::VectorXd w2(int k) const { return w.tail(k); }
};

// Immutable per-fit bundle: data, prior, precision family shared by both
// diseases, and the adjacency matrix used by the eta update.
struct ModelContext {
  const Dataset* data;
  PrecisionKind kind;
  PriorSpec prior;
  PrecisionModel model;
  Eigen::SparseMatrix<double> adjacency;

  ModelContext(const Dataset& d, PrecisionKind kind_, const PriorSpec& p)
      : data(&d), kind(kind_), prior(p), model(d.graph, kind_), adjacency(d.graph.adjacency()) {
    d.validate();
    p.validate();
  }
};

// Dense Gaussian full conditional N(mean, precision^{-1}).
class NormalConditional {
public:
  NormalConditional(Eigen::VectorXd mean, Eigen::MatrixXd precision);
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& precision() const { return prec_; }
  Eigen::VectorXd sample(RngStream& rng) const;
  double log_pdf(const Eigen::VectorXd& x) const;

private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd prec_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double logdet_;
};

struct GammaConditional {
  double shape;
  double rate;
  double sample(RngStream& rng) const { return rng.gamma(shape, rate); }
  double log_pdf(double x) const;
};

struct InvGammaConditional {
  double shape;
  double rate;
  double sample(RngStream& rng) const { return rng.inverse_gamma(shape, rate); }
  double log_pdf(double x) const;
};

// Sparse Gaussian full conditional of the 2k latent effects:
// precision P = Qw(rho, tau, eta) + blockdiag(I/sigma1^2, I/sigma2^2),
// mean P^{-1} b with b the precision-weighted residuals.
class WFullConditional {
public:
  WFullConditional(const ModelContext& ctx, const ChainState& state);
  const Eigen::VectorXd& mean() const { return mean_; }
  Eigen::VectorXd sample(RngStream& rng) const;
  double log_pdf(const Eigen::VectorXd& x) const;

private:
  Eigen::VectorXd mean_;
  Eigen::SparseMatrix<double> prec_;
  std::unique_ptr<SparseCholesky> chol_;
};

NormalConditional beta_conditional(const ModelContext& ctx, const ChainState& state, int disease);
InvGammaConditional sigma2_conditional(const ModelContext& ctx, const ChainState& state,
                                       int disease);
GammaConditional tau_conditional(const ModelContext& ctx, const ChainState& state, int disease);
NormalConditional eta_conditional(const ModelContext& ctx, const ChainState& state);

// rho-space log target of the Metropolis update (flat prior, no Jacobian):
// logdet(Q(rho))/2 - tau/2 v^T Q(rho) v with v = w1 (which=0) or
// v = w2 - A21 w1 (which=1).
double rho_log_target(const ModelContext& ctx, const ChainState& state, int which, double rho);

// Joint log posterior of the full hierarchy, up to the normalizing constant
// of the data. The oracle for every conditional update.
double log_joint(const ModelContext& ctx, const ChainState& state);

// Column layout of the retained-draw matrix.
struct DrawsLayout {
  int p1 = 0;
  int p2 = 0;
  int k = 0;

  int beta1() const { return 0; }
  int beta2() const { return p1; }
  int sigma2() const { return p1 + p2; }
  int tau() const { return p1 + p2 + 2; }
  int rho() const { return p1 + p2 + 4; }
  int eta() const { return p1 + p2 + 6; }
  int w1() const { return p1 + p2 + 8; }
  int w2() const { return p1 + p2 + 8 + k; }
  int total() const { return p1 + p2 + 8 + 2 * k; }
};

struct PosteriorDraws {
  DrawsLayout layout;
  std::vector<std::string> names;  // column names, size layout.total()
  Eigen::MatrixXd values;          // retained draws, chains stacked in order
  std::vector<int> chain_of_row;
  std::vector<int> iteration_of_row;
  int n_chains = 1;
  std::vector<std::array<double, 2>> acceptance;  // post-burn-in rho rates per chain

  int rows() const { return static_cast<int>(values.rows()); }
  int column_index(const std::string& name) const;  // -1 if absent
  Eigen::VectorXd column(const std::string& name) const;
};

std::vector<std::string> draw_column_names(const Dataset& data);

PosteriorDraws run_mcmc(const Dataset& data, PrecisionKind kind, const PriorSpec& prior,
                        const McmcConfig& config);

// Exposed for the prior-vs-Gibbs calibration test: one full update cycle
// (beta, w, sigma2, tau, eta, rho1, rho2) on a state in place.
void gibbs_cycle(const ModelContext& ctx, ChainState& state, RngStream& rng,
                 std::array<int, 2>* accept_counter = nullptr);

ChainState initial_state(const ModelContext& ctx, const McmcConfig& config);

struct SummaryRow {
  std::string name;
  double mean = 0.0;
  double lo = 0.0;  // 2.5% quantile
  double hi = 0.0;  // 97.5% quantile
  double ess = 0.0;
  bool degenerate = false;
  std::string formatted;  // "mean (lo, hi)" at 2 decimal places
};

std::vector<SummaryRow> summarize(const PosteriorDraws& draws);
SummaryRow summarize_series(const std::string& name, const Eigen::VectorXd& values);

struct EssResult {
  double value = 0.0;
  bool degenerate = false;
};

// Initial-positive-sequence autocorrelation estimator; multi-chain draws sum
// per-chain estimates.
EssResult effective_sample_size(const PosteriorDraws& draws, const std::string& param);
EssResult ess_of_series(const Eigen::VectorXd& x);

}  // namespace bdagar
